"""Reading side of the bundle interface.

A bundle is a directory written by `esqpt-lab reproduce-all`: numeric
CSV tables under fig1/ .. fig5/, each opening with a format tag and a
config-hash comment, and a summary.json manifest listing every table
with the hash it was written under.  Everything here validates against
that manifest; a table that is missing, malformed, or carries the wrong
hash is refused rather than rendered.
"""
import json
import os

import numpy as np

FORMAT_TAG = "esqpt-lab v1"
FIGURES = ("fig1", "fig2", "fig3", "fig4", "fig5")


class BundleError(Exception):
    """A bundle file is missing, malformed, or fails its hash check."""


def read_table(path: str):
    """Parse one bundle CSV into (columns, config_hash).

    Every cell must parse as a float; the producer keeps labels out of
    the figure tables, so anything non-numeric means corruption.
    """
    try:
        with open(path, "r", newline="") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise BundleError(f"{path}: {exc}") from exc
    if len(lines) < 4:
        raise BundleError(f"{path}: too short to be a bundle table")
    if lines[0].strip() != f"# {FORMAT_TAG}":
        raise BundleError(f"{path}: unexpected format tag {lines[0]!r}")
    if not lines[1].startswith("# config="):
        raise BundleError(f"{path}: missing config line")
    config = lines[1][len("# config="):].strip()
    names = lines[2].split(",")
    rows = []
    for k, line in enumerate(lines[3:], start=4):
        cells = line.split(",")
        if len(cells) != len(names):
            raise BundleError(
                f"{path}:{k}: {len(cells)} cells under {len(names)} names")
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise BundleError(f"{path}:{k}: non-numeric cell") from exc
    data = np.asarray(rows)
    return {n: data[:, i] for i, n in enumerate(names)}, config


class Bundle:
    """A reproduce-all output directory, tables validated on access."""

    def __init__(self, root: str, summary: dict):
        self.root = root
        self.summary = summary
        self._hashes = {entry["file"]: entry["config_sha256"]
                        for entry in summary.get("files", [])}

    @classmethod
    def load(cls, root: str) -> "Bundle":
        path = os.path.join(root, "summary.json")
        try:
            with open(path) as fh:
                summary = json.load(fh)
        except OSError as exc:
            raise BundleError(f"{path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise BundleError(f"{path}: not valid JSON ({exc})") from exc
        figures = summary.get("figures", {})
        missing = [name for name in FIGURES if not figures.get(name)]
        if missing:
            raise BundleError(f"summary lists no files for {missing}")
        return cls(root, summary)

    def files_for(self, figure: str) -> list:
        return list(self.summary["figures"][figure])

    def table(self, rel: str, required=()) -> dict:
        """Load one table, checking its hash and required columns."""
        want = self._hashes.get(rel)
        if want is None:
            raise BundleError(f"{rel}: not listed in summary.json")
        columns, config = read_table(os.path.join(self.root, rel))
        if config != want:
            raise BundleError(
                f"{rel}: config hash {config} does not match the manifest")
        absent = [c for c in required if c not in columns]
        if absent:
            raise BundleError(f"{rel}: missing columns {absent}")
        return columns
