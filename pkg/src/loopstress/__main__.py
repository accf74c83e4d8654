"""Allow running the command-line interface as ``python -m loopstress``."""
from loopstress.cli import entry

if __name__ == "__main__":
    entry()
