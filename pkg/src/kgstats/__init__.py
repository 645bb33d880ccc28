"""Schema-based statistics for RDF knowledge graphs."""
from importlib import resources

from .engine import Algorithm, AlgorithmConfig, compute_statistics
from .hierarchy import HierarchyIndex
from .ntriples import load, parse_text
from .schema import SchemaTriple, extract_stored_schema
from .store import StatIndex, retrieve_statistics
from .terms import Graph, Kind

__version__ = "0.1.0"


def simple_path() -> str:
    """Path of the bundled Simple example graph."""
    return str(resources.files(__package__).joinpath("data/simple.nt"))


def build_index(g: Graph, cfg: AlgorithmConfig | None = None, workers: int = 1,
                collapse_cycles: bool = False) -> StatIndex:
    """Hierarchy, stored schema and statistics for a classified graph in one call."""
    h = HierarchyIndex(g, collapse_cycles=collapse_cycles)
    return compute_statistics(g, h, extract_stored_schema(g, h), cfg or AlgorithmConfig(), workers=workers)
