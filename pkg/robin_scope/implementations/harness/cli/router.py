import argparse

from robin_scope.implementations.harness.config import BUDGETS, EXPERIMENTS

DESCRIPTIONS = {
    "band": "build and save the band table, Theta(gamma) per gamma",
    "limits": "semiclassical energy and counting limits of the configured boundary",
    "models": "torus, Dirichlet-square and cylinder model spectra",
    "disk-converge": "convergence study of the disk against the limits",
    "square-count": "eigenvalue counting on the Neumann square",
    "lt-check": "Lieb-Thirring moments on the half-line and the strip",
    "validate": "run the acceptance suite",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robin-scope",
        description="Spectral experiments for the magnetic Robin Laplacian.",
    )
    commands = parser.add_subparsers(dest="experiment", required=True, metavar="experiment")
    for name in EXPERIMENTS:
        command = commands.add_parser(name, help=DESCRIPTIONS[name])
        command.add_argument("--config", metavar="PATH", help="TOML run configuration")
        command.add_argument("--out", metavar="DIR", help="output directory")
        command.add_argument("--budget", choices=BUDGETS, help="validation budget")
        command.add_argument("--threads", type=int, metavar="N", help="worker threads for parallel sweeps")
        command.add_argument("--log-format", choices=("console", "json"), help="log renderer")
        command.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    return parser
