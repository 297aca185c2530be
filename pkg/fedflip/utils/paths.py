"""Path utilities."""

from pathlib import Path


def resolve_relative(value: str, base_dir: Path) -> Path:
    """Resolve a path read from a config file against the file's directory."""
    path = Path(value)
    if str(path).startswith("~"):
        return path.expanduser()
    if not path.is_absolute():
        path = base_dir / path
    return path
