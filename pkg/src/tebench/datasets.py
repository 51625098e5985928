"""Access to the bundled topology corpus and example fixtures."""

from __future__ import annotations

from pathlib import Path

_DATA = Path(__file__).parent / "data"


def corpus_topology_paths() -> list[Path]:
    """The bundled benchmark topologies, sorted by name."""
    return sorted((_DATA / "topologies").glob("*.graph"))


def example_path(name: str) -> Path:
    """A bundled example file, e.g. 'triangle.graph' or 'diamond.demands'."""
    path = _DATA / "examples" / name
    if not path.exists():
        raise FileNotFoundError(f"no bundled example named {name!r}")
    return path
