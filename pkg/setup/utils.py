"""
General utils
"""
import json
from pathlib import Path

import yaml


def create_directory(path):
    """
    create directory
    :param path:
    :return: the directory as a Path
    """
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


def save_json(dictionery, json_path):
    with open(json_path, "w") as outfile:
        json.dump(dictionery, outfile, indent=1)


def load_json(json_path):
    with open(json_path, "r") as file:
        obj = json.load(file)
    return obj


def load_yaml(yaml_path):
    with open(yaml_path, "r") as file:
        obj = yaml.safe_load(file)
    return obj
