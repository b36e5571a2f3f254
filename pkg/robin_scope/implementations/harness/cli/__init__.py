import sys
from typing import Optional, Sequence

from robin_scope.implementations.harness.cli.controller import RunController
from robin_scope.implementations.harness.cli.router import build_parser
from robin_scope.implementations.harness.cli.view import RunView


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return RunController(RunView()).handle(args)


if __name__ == "__main__":
    sys.exit(main())
