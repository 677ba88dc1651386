"""Reference external evaluator for the archdse wire protocol."""

from .server import PROTOCOL_VERSION, TableError, load_table, main, serve

__version__ = "0.1.0"

__all__ = ["PROTOCOL_VERSION", "TableError", "load_table", "main", "serve"]
