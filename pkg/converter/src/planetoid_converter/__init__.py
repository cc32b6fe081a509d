"""Planetoid binary distribution to text-bundle converter."""

from .convert import assemble, convert, write_bundle_files
from .loader import (ConverterError, CorruptShard, MissingShard,
                     PlanetoidSource, load_source, parse_index_file)

__version__ = "0.1.0"
