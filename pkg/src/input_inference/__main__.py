"""Entry point for the experiment runner: python -m input_inference"""

import sys

from input_inference.cli.main import main as run


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
