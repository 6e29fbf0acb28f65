"""Deterministic result artifacts: CSV tables and JSON sidecars.

Artifacts carry no wall-clock timestamps, and metadata keys are written
in sorted order, so rerunning a command with the same configuration and
seed produces byte-identical files. Each CSV starts with '# key: value'
comment lines (including a sha256 digest of the run configuration) and
is paired with a JSON sidecar holding the full metadata.
"""

import csv
import hashlib
import json
import subprocess

import numpy as np

__all__ = [
    "config_digest",
    "git_revision",
    "run_metadata",
    "write_csv",
    "write_sidecar",
    "read_csv",
]


def _plain(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def config_digest(config):
    """sha256 over the canonical JSON form of a configuration mapping."""
    canon = json.dumps(_plain(config), sort_keys=True,
                       separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def git_revision():
    """Current revision via git describe; "unknown" outside a checkout."""
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True, text=True, timeout=10)
    except OSError:
        return "unknown"
    if out.returncode != 0:
        return "unknown"
    return out.stdout.strip() or "unknown"


def run_metadata(config, seed=None, tolerances=None):
    """Metadata block shared by a CSV header and its JSON sidecar."""
    from windstat import __version__
    from windstat.kernels import BACKEND

    meta = {
        "backend": BACKEND,
        "config_sha256": config_digest(config),
        "package_version": __version__,
        "revision": git_revision(),
    }
    if seed is not None:
        meta["seed"] = int(seed)
    if tolerances:
        meta["tolerances"] = _plain(tolerances)
    return meta


def write_csv(path, fieldnames, rows, metadata=None):
    """Write rows with '# key: value' metadata comments above the header."""
    with open(path, "w", newline="") as fh:
        if metadata:
            for key in sorted(metadata):
                fh.write(f"# {key}: {json.dumps(_plain(metadata[key]), sort_keys=True)}\n")
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _plain(v) for k, v in row.items()})


def write_sidecar(path, metadata):
    """Write the metadata mapping as sorted, indented JSON."""
    with open(path, "w") as fh:
        json.dump(_plain(metadata), fh, sort_keys=True, indent=2)
        fh.write("\n")


def read_csv(path):
    """Round-trip reader: returns (metadata dict, list of row dicts)."""
    meta = {}
    rows = []
    with open(path, newline="") as fh:
        header_done = False
        buffered = []
        for line in fh:
            if not header_done and line.startswith("# "):
                key, _, raw = line[2:].partition(": ")
                meta[key] = json.loads(raw)
            else:
                header_done = True
                buffered.append(line)
        reader = csv.DictReader(buffered)
        rows.extend(reader)
    return meta, rows
