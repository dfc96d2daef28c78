import os
from pathlib import Path

# base path, override with RELCHAIN_BASE_PATH
BASE_PATH = Path(os.environ.get("RELCHAIN_BASE_PATH", Path.home()))
# project path
PROJECT_PATH = BASE_PATH / "relchain"
# workspace path
WORKSPACE_PATH = PROJECT_PATH / "workspace"
# results path
RESULTS_PATH = WORKSPACE_PATH / "results"  # where experiment csv files are stored
# shipped configuration files (latency profiles, default run config)
CONFIGS_PATH = Path(__file__).resolve().parent.parent / "configs"
