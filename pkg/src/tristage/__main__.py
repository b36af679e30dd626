"""Allow ``python -m tristage``."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
