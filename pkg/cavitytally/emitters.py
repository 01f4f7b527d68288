# python3
# emitters.py
# Writes tables and summaries as CSV or JSON, and the run manifest which
# lists every written file with its SHA-256 checksum.

# File layouts are documented in docs/formats.rst.  Any change to a
# header or JSON key must bump core.SCHEMA_VERSION.
#
# Floats are written with repr() so that values read back are bitwise
# identical.  Non-finite values are written as "inf"/"nan" in CSV and as
# null in JSON.

import csv
from datetime import datetime, timezone
import hashlib
import json
import logging
import math
import os

import numpy as np

from .core import SCHEMA_VERSION, ConfigError

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")
MANIFEST_FILENAME = "manifest.json"


def checksum(dirname, filename):
    with open(os.path.join(dirname, filename), "rb") as f:
        return hashlib.sha256(f.read()).hexdigest()


def read_manifest(path):
    """A run manifest as written by Emitter.write_manifest, or None for a plain configuration."""
    try:
        with open(path, "rt", encoding="utf-8") as f:
            document = json.load(f)
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError("config", f"cannot parse {path}: {e}")
    if not isinstance(document, dict) or "options" not in document:
        return None
    return document


def _plain(value):
    """numpy scalars/arrays and namedtuples to JSON-ready python values."""
    if hasattr(value, "_asdict"):
        return {k: _plain(v) for k, v in value._asdict().items()}
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def record_fields(record, prefix=""):
    """Flatten a namedtuple into (column, value) pairs, nested records joined by '_'.

    Array-valued fields are skipped: they belong in tables, not summaries.
    """
    fields = []
    for key, value in record._asdict().items():
        name = f"{prefix}{key}"
        if hasattr(value, "_asdict"):
            fields += record_fields(value, f"{name}_")
        elif not isinstance(value, (np.ndarray, list, tuple, dict)):
            fields.append((name, value))
    return fields


class Emitter:
    """Writes the outputs of one command into outdir and remembers them."""

    def __init__(self, outdir, fmt="csv"):
        if fmt not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
        self.outdir = outdir
        self.fmt = fmt
        self.outputs = []
        os.makedirs(outdir, exist_ok=True)

    def path_for(self, filename):
        """Full path for an output file, which is then listed in the manifest."""
        self.outputs.append(filename)
        return os.path.join(self.outdir, filename)

    def write_table(self, stem, header, rows):
        """rows is an iterable of sequences matching header."""
        filename = f"{stem}.{self.fmt}"
        path = self.path_for(filename)
        if self.fmt == "csv":
            with open(path, "wt", newline="", encoding="utf-8") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(header)
                for row in rows:
                    writer.writerow([_csv_cell(v) for v in row])
        else:
            document = {
                "schema_version": SCHEMA_VERSION,
                "table": stem,
                "columns": list(header),
                "rows": [_plain(list(row)) for row in rows],
            }
            self._dump_json(path, document)
        logger.info(f"Wrote {path}")
        return filename

    def write_summary(self, stem, fields, as_json=False):
        """One named-column row (CSV) or one flat object (JSON)."""
        if self.fmt == "csv" and not as_json:
            header = [name for name, _ in fields]
            return self.write_table(stem, header, [[value for _, value in fields]])
        filename = f"{stem}.json"
        path = self.path_for(filename)
        document = {"schema_version": SCHEMA_VERSION}
        document.update({name: _plain(value) for name, value in fields})
        self._dump_json(path, document)
        logger.info(f"Wrote {path}")
        return filename

    def write_manifest(self, command, argv, seed, params, options, tool_version):
        manifest = {
            "schema_version": SCHEMA_VERSION,
            "tool_version": tool_version,
            "command": command,
            "argv": list(argv),
            "seed": seed,
            "params": params,
            "options": _plain(options),
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "outputs": [
                {"file": f, "sha256": checksum(self.outdir, f)} for f in self.outputs
            ],
        }
        path = os.path.join(self.outdir, MANIFEST_FILENAME)
        self._dump_json(path, manifest)
        return manifest

    @staticmethod
    def _dump_json(path, document):
        with open(path, "wt", encoding="utf-8") as f:
            f.write(json.dumps(document, indent=4, sort_keys=True, allow_nan=False))
            f.write("\n")
