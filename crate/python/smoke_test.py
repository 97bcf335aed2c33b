"""Smoke test for the alp_py extension.

Build it first with `cargo build -p alp-py --release`, then run
`python3 python/smoke_test.py`. The script copies the shared library next
to itself under the importable name.
"""

import importlib
import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "crates" / "core" / "fixtures"


def load_extension():
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libalp_py.so"
        if lib.exists():
            break
    else:
        sys.exit("libalp_py.so not found; run `cargo build -p alp-py --release`")
    where = Path(tempfile.mkdtemp())
    shutil.copy(lib, where / "alp_py.so")
    sys.path.insert(0, str(where))
    return importlib.import_module("alp_py")


def main():
    alp = load_extension()

    model = alp.Model.load(str(FIXTURES / "rpc_prior.toml"))
    assert len(model.states()) == 20, model
    assert model.initial == "010"
    assert model.apply_action("010", "E") == "110"
    assert "loaded = 1 -> loc(r) = loc(p)" in model.constraints
    assert not model.is_state("011")
    bigger = model.weaken("011")
    assert sorted(bigger.states()) == sorted(model.states() + ["011"])
    assert abs(model.sim("010", "110", 0.5) - 0.2) < 1e-12
    assert set(model.above_threshold([1.5, 0.5, 0.01, 0.01], 0.5)) == {"100", "120", "130"}
    assert len(model.factorize().rules) <= len(model.rules)

    scratch = alp.Model.load(str(FIXTURES / "rpc_prior.toml"), from_scratch=True)
    assert scratch.states() == ["000"]

    p = alp.Pdf("gaussian", 0.5, 0.25)
    assert abs(p.mode_density() - 1 / (0.25 * math.sqrt(2 * math.pi))) < 1e-12
    q = alp.Pdf.fit("gaussian", [1.0, 2.0, 3.0])
    assert abs(q.mean - 2.0) < 1e-12
    assert p.blend(q, 1.0).params == p.params

    cfg = alp.Config.read(str(FIXTURES / "new_room.toml"))
    run = alp.run(cfg)
    records = run.records()
    assert [r["record"]["chosen"] for r in records] == ["130", "440", "441"]
    assert dict(run.model().domain_sizes)["room"] == 5

    cfg = alp.Config.read(str(FIXTURES / "smoke.toml"))
    cfg.max_iter = 200
    first, second = alp.run(cfg), alp.run(cfg)
    assert first.trace() == second.trace()
    metrics = first.metrics()
    assert metrics["steps"] == 200
    assert 0.0 <= metrics["transition_agreement"] <= 1.0

    out = Path(tempfile.mkdtemp())
    written = first.write_reports(str(out))
    assert len(written) == 4
    assert alp.replay(str(out / "trace.jsonl"), cfg) == "identical"
    cfg.epsilon = 0.5
    assert alp.replay(str(out / "trace.jsonl"), cfg).startswith("diverged")

    print("alp_py smoke test passed:", model, metrics["domain_sizes"])


if __name__ == "__main__":
    main()
