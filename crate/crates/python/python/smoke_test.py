"""Smoke test for the qubit_chaos extension module.

Build first with `cargo build --release -p qubit-chaos-py`; the script loads
the shared library straight from the cargo target directory.
"""

import importlib.util
import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[3]


def load():
    for profile in ("release", "debug"):
        for name in ("libqubit_chaos_py.so", "libqubit_chaos_py.dylib", "qubit_chaos_py.dll"):
            lib = ROOT / "target" / profile / name
            if lib.exists():
                tmp = Path(tempfile.mkdtemp())
                suffix = ".pyd" if name.endswith(".dll") else ".so"
                dest = tmp / f"qubit_chaos{suffix}"
                shutil.copy(lib, dest)
                spec = importlib.util.spec_from_file_location("qubit_chaos", dest)
                mod = importlib.util.module_from_spec(spec)
                spec.loader.exec_module(mod)
                return mod
    sys.exit("extension not built: run `cargo build --release -p qubit-chaos-py`")


def main():
    qc = load()
    print("qubit_chaos", qc.__version__)

    levels = qc.band_spectrum(3, 3, 0.2, seed=4)
    assert len(levels) == 126
    assert all(a <= b for a, b in zip(levels, levels[1:]))

    eps = [0.1 * i for i in range(8)]
    mu, occ = qc.fd_occupations(4.0, eps, 4)
    assert abs(sum(occ) - 4) < 1e-10
    fit = qc.fd_fit(occ, eps, 4)
    assert abs(fit["beta"] - 4.0) < 1e-3, fit

    n = 4000
    poisson = [-math.log(1 - (i + 0.5) / n) for i in range(n)]
    eta, _ = qc.eta(poisson)
    assert abs(eta - 1) < 0.02, eta

    th = qc.theory(12, 0.3)
    assert th["N_B"] == 924 and math.isclose(th["J_c"], 3.7 / 12)

    cfg = qc.Config("sigma_scan", rows=3, cols=3, realizations=4, Jn=[2.0, 5.0])
    assert cfg.band_dim == 126 and len(cfg.couplings) == 2
    summary = qc.run_ensemble(cfg)
    assert summary.completed == 4 and not summary.failures
    table = summary.tables()[""]
    assert table.splitlines()[0].startswith("J_over_delta,Jn_over_delta,sigma_fd")
    assert json.loads(summary.to_json())["completed"] == 4

    with tempfile.TemporaryDirectory() as out:
        files = summary.write("scan", out)
        assert any(f.endswith("scan.meta") for f in files)
        try:
            summary.write("scan", out)
        except ValueError as e:
            assert "force" in str(e)
        else:
            raise AssertionError("overwrite was not refused")

    try:
        qc.Config("eta_scan", rows=1)
    except ValueError:
        pass
    else:
        raise AssertionError("bad config accepted")

    print("ok")


if __name__ == "__main__":
    main()
