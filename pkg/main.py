import sys

from robin_scope.implementations.harness.cli import main

if __name__ == "__main__":
    sys.exit(main())
