"""End-to-end: build a real desk-scale bundle with the producer CLI and
render it.  The producer is exercised strictly as an external command;
nothing here imports it."""
import os
import subprocess

import pytest

from esqpt_figs.bundle import Bundle
from esqpt_figs.render import render_all, ring_spread


@pytest.mark.slow
def test_desk_scale_bundle_renders_end_to_end(tmp_path):
    bundle_dir = str(tmp_path / "bundle")
    proc = subprocess.run(
        ["esqpt-lab", "reproduce-all", "--scale", "desk", "--seed", "0",
         "--outdir", bundle_dir],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr + proc.stdout

    paths = render_all(bundle_dir, str(tmp_path / "figs"))
    assert [os.path.basename(p) for p in paths] == \
        [f"fig{k}.png" for k in range(1, 6)]
    assert all(os.path.getsize(p) > 10_000 for p in paths)

    bundle = Bundle.load(bundle_dir)
    for rel in bundle.files_for("fig1"):
        cols = bundle.table(rel, ("u", "v", "epsilon"))
        spread = ring_spread(cols["u"], cols["v"], cols["epsilon"])
        if "delta0" in rel:
            assert spread < 1e-9, rel
        elif rel.endswith("_r2.csv"):
            # the broken-symmetry side really does vary along rings
            assert spread > 1e-3, rel
