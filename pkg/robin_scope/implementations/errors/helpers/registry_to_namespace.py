"""Regenerate the error namespace modules from ``registry/*.json``.

Run from the repository root::

    python -m robin_scope.implementations.errors.helpers.registry_to_namespace
"""
import json
from pathlib import Path

ERRORS_DIR = Path(__file__).resolve().parent.parent
REGISTRY_DIR = ERRORS_DIR / "registry"


def constant_name(code: str) -> str:
    return code.split(".", 1)[1].upper()


def class_name(area: str) -> str:
    return f"{area.capitalize()}Errors"


def render(area: str, codes: list[str], source: str) -> str:
    lines = [
        "# AUTO-GENERATED FILE - DO NOT EDIT",
        f"# Source: registry/{source}",
        "",
        f"class {class_name(area)}:",
    ]
    for code in sorted(codes):
        lines.append(f"    {constant_name(code)} = \"{code}\"")
    return "\n".join(lines) + "\n"


def main() -> None:
    for src in sorted(REGISTRY_DIR.glob("*.json")):
        data = json.loads(src.read_text())
        codes = list(data["errors"])
        areas = {code.split(".", 1)[0] for code in codes}
        if len(areas) != 1:
            raise ValueError(f"{src.name} mixes error areas: {sorted(areas)}")
        area = areas.pop()
        (ERRORS_DIR / f"{area}.py").write_text(render(area, codes, src.name))


if __name__ == "__main__":
    main()
