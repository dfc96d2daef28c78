import sys

from relchain.cli import main

sys.exit(main())
