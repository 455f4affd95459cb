"""Checks on the pinned runtime dependencies."""

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from pathlib import Path

PROJECT_ROOT = Path(__file__).parent.parent


def _pyproject_deps() -> set[str]:
    with open(PROJECT_ROOT / "pyproject.toml", "rb") as f:
        return set(tomllib.load(f)["project"]["dependencies"])


def _requirements() -> set[str]:
    with open(PROJECT_ROOT / "requirements.txt") as f:
        return {line.strip() for line in f if line.strip() and not line.startswith("#")}


def test_requirements_match_pyproject():
    """requirements.txt must list exactly the pyproject dependencies."""
    pyproject_deps = _pyproject_deps()
    requirements = _requirements()
    assert pyproject_deps == requirements, (
        f"Dependencies mismatch!\n"
        f"Only in pyproject.toml: {pyproject_deps - requirements}\n"
        f"Only in requirements.txt: {requirements - pyproject_deps}"
    )


def test_runtime_dependencies_are_pinned():
    """Every runtime dependency carries an exact version so checkpoints stay reproducible."""
    for dep in _pyproject_deps():
        name, sep, version = dep.partition("==")
        assert sep and version, f"{dep} is not pinned"


def test_numeric_stack_present():
    names = {dep.partition("==")[0].lower() for dep in _pyproject_deps()}
    assert {"numpy", "pillow"} <= names
