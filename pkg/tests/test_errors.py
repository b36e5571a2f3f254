import json

import pytest

from robin_scope.implementations import errors
from robin_scope.implementations.errors.helpers.registry_to_namespace import (
    ERRORS_DIR,
    REGISTRY_DIR,
    class_name,
    render,
)

REGISTRIES = sorted(REGISTRY_DIR.glob("*.json"))


@pytest.mark.parametrize("source", REGISTRIES, ids=lambda p: p.stem)
def test_generated_module_matches_registry(source):
    codes = list(json.loads(source.read_text())["errors"])
    area = codes[0].split(".", 1)[0]
    assert (ERRORS_DIR / f"{area}.py").read_text() == render(area, codes, source.name)


@pytest.mark.parametrize("source", REGISTRIES, ids=lambda p: p.stem)
def test_every_code_is_exported(source):
    data = json.loads(source.read_text())
    area = next(iter(data["errors"])).split(".", 1)[0]
    namespace = getattr(errors, class_name(area))
    exported = {v for k, v in vars(namespace).items() if k.isupper()}
    assert exported == set(data["errors"])
    for entry in data["errors"].values():
        assert entry["category"]
        assert entry["description"]


def test_exception_keeps_its_detail():
    exc = errors.SpectralException(errors.SolverErrors.BUDGET_EXCEEDED, "too big", detail={"rows": []})
    assert str(exc) == "too big"
    assert exc.detail == {"rows": []}
