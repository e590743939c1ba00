"""Tool and file-schema version constants."""

__version__ = "0.1.0"

#: Version of the config / results.csv schema, printed by ``--version``.
SCHEMA_VERSION = 1
