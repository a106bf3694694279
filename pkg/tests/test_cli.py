import json
import math
from pathlib import Path

import numpy as np
import pytest

from exmhd import cli
from exmhd import exterior as E
from exmhd import mhd
from exmhd.checks import random_form
from exmhd.lattice import build_box
from exmhd.snapshot import write_snapshot

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
TWO_PI = 2 * math.pi


def _small_config(tmp_path, **over):
    raw = json.loads((CONFIGS / "reference_n3.json").read_text())
    raw["box"]["dims"] = [16, 16, 16]
    raw.update({"t_end": 0.01, "report_every": 1})
    raw.update(over)
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(raw))
    return p


# -- identities / oracle --------------------------------------------------------------


def test_identities_pass(capsys):
    assert cli.main(["identities", "--n", "2,3", "--points", "8"]) == 0
    out = capsys.readouterr().out
    assert "d(d w)=0" in out and "residual=" in out
    assert "checks passed" in out


def test_identities_catch_star_sign_bug(monkeypatch, capsys):
    real = E.star

    def buggy(w):
        s = real(w)
        return -s if w.degree == 1 else s

    monkeypatch.setattr(E, "star", buggy)
    assert cli.main(["identities", "--n", "2,3", "--points", "8"]) != 0
    assert "FAIL" in capsys.readouterr().out


def test_identities_reject_bad_dimension(capsys):
    assert cli.main(["identities", "--n", "7"]) == 2


def test_oracle_command(capsys):
    assert cli.main(["oracle", "--n", "2,3", "--samples", "5"]) == 0


def test_unknown_command_is_bad_input(capsys):
    assert cli.main(["frobnicate"]) == 2


# -- run -----------------------------------------------------------------------------------


def test_run_writes_csv(tmp_path, capsys):
    cfg = _small_config(tmp_path)
    assert cli.main(["run", str(cfg), "--out-dir", str(tmp_path)]) == 0
    header, rows = cli.read_csv(tmp_path / "reference_n3.csv")
    assert header[:3] == ["t", "N", "H"] and "C" in header and "ortho3" in header
    assert rows.shape == (6, len(header))
    assert np.all(np.isfinite(rows))


def test_run_is_deterministic(tmp_path, capsys):
    cfg = _small_config(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["run", str(cfg), "--out-dir", str(a)]) == 0
    assert cli.main(["run", str(cfg), "--out-dir", str(b)]) == 0
    assert (a / "reference_n3.csv").read_bytes() == (b / "reference_n3.csv").read_bytes()


def test_run_zero_duration_gives_one_row(tmp_path, capsys):
    cfg = _small_config(tmp_path, t_end=0.0)
    assert cli.main(["run", str(cfg), "--out-dir", str(tmp_path)]) == 0
    _, rows = cli.read_csv(tmp_path / "reference_n3.csv")
    assert rows.shape[0] == 1 and rows[0, 0] == 0.0


def test_run_writes_snapshots(tmp_path, capsys):
    cfg = _small_config(tmp_path, snapshot_every=2, output={"csv": "x.csv", "snapshot_dir": "snaps"})
    assert cli.main(["run", str(cfg), "--out-dir", str(tmp_path)]) == 0
    snaps = sorted(p.name for p in (tmp_path / "snaps").iterdir())
    assert "snap_000000.nfrm" in snaps and "snap_000004.nfrm" in snaps
    assert cli.main(["invariants", str(tmp_path / "snaps" / snaps[-1])]) == 0


def test_run_malformed_config(tmp_path, capsys):
    cfg = _small_config(tmp_path, unexpected=3)
    assert cli.main(["run", str(cfg)]) == 2
    assert "unexpected" in capsys.readouterr().err


def test_run_missing_config(tmp_path, capsys):
    assert cli.main(["run", str(tmp_path / "nope.json")]) == 2


def test_run_density_abort(tmp_path, capsys):
    # a violent flow with a cold gas empties cells quickly
    cfg = _small_config(tmp_path, dt=0.05, t_end=5.0, closure={"kind": "isothermal", "c": 0.01},
                        init={"u_amp": 3.0, "rho_eps": 0.2})
    with pytest.warns(RuntimeWarning):
        code = cli.main(["run", str(cfg), "--out-dir", str(tmp_path)])
    assert code == 3
    assert "abort" in capsys.readouterr().err


# -- invariants ------------------------------------------------------------------------------------


def _constant_field_snapshot(path, euler=False):
    box = build_box(3, [8, 8, 8])
    s = mhd.MhdState(0.0, np.ones(box.dims), E.zero_form(box, 1), E.zero_form(box, 1), E.basis_form(box, (0, 1)))
    write_snapshot(path, s, euler=euler)


def test_invariants_constant_field_hand_values(tmp_path, capsys):
    p = tmp_path / "b.nfrm"
    _constant_field_snapshot(p)
    assert cli.main(["invariants", str(p), "--closure", "incompressible"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    row = dict(zip(lines[0].split(","), map(float, lines[1].split(","))))
    assert row["N"] == pytest.approx(TWO_PI**3, rel=1e-14)
    assert row["H"] == pytest.approx(0.5 * TWO_PI**3, rel=1e-14)
    assert row["C"] == 0.0 and row["M"] == 0.0
    assert row["ortho3"] == pytest.approx(math.sqrt(TWO_PI**3), rel=1e-13)
    assert row["maxB"] == pytest.approx(1.0)


def test_invariants_euler_snapshot_omits_field_helicities(tmp_path, capsys):
    p = tmp_path / "e.nfrm"
    _constant_field_snapshot(p, euler=True)
    assert cli.main(["invariants", str(p)]) == 0
    header = capsys.readouterr().out.splitlines()[0].split(",")
    assert "Hf" in header and "C" not in header and "M" not in header and "ortho1" not in header


def test_invariants_corrupt_magic(tmp_path, capsys):
    p = tmp_path / "b.nfrm"
    _constant_field_snapshot(p)
    raw = bytearray(p.read_bytes())
    raw[:5] = b"JUNK!"
    p.write_bytes(bytes(raw))
    assert cli.main(["invariants", str(p)]) == 2
    assert "magic" in capsys.readouterr().err


def test_invariants_rejects_form_snapshot(tmp_path, box3, rng, capsys):
    p = tmp_path / "w.nfrm"
    write_snapshot(p, random_form(box3, rng, 1))
    assert cli.main(["invariants", str(p)]) == 2


def test_invariants_symmetric_rejects_nonsymmetric(tmp_path, box3, capsys):
    p = tmp_path / "s.nfrm"
    write_snapshot(p, mhd.make_initial(box3, mhd.Closure(), 1))
    assert cli.main(["invariants", str(p), "--symmetric-axis", "2"]) == 2


# -- decompose ------------------------------------------------------------------------------------


def _norms(out):
    return {ln.split()[0]: float(ln.split("norm=")[1]) for ln in out.splitlines() if "norm=" in ln}


def test_decompose_exact_input(tmp_path, box3, rng, capsys):
    p = tmp_path / "w.nfrm"
    write_snapshot(p, E.d(random_form(box3, rng, 1)))
    assert cli.main(["decompose", str(p)]) == 0
    norms = _norms(capsys.readouterr().out)
    assert norms["coexact"] <= 1e-10 and norms["harmonic"] <= 1e-10 and norms["exact"] > 1


def test_decompose_constant_input(tmp_path, box3, capsys):
    p = tmp_path / "w.nfrm"
    write_snapshot(p, E.constant_form(box3, 1, [1.0, 2.0, 3.0]))
    assert cli.main(["decompose", str(p)]) == 0
    norms = _norms(capsys.readouterr().out)
    assert norms["exact"] <= 1e-12 and norms["coexact"] <= 1e-12
    assert norms["harmonic"] == pytest.approx(math.sqrt(14 * TWO_PI**3))


def test_decompose_random_pythagoras(tmp_path, box3, rng, capsys):
    p = tmp_path / "w.nfrm"
    write_snapshot(p, random_form(box3, rng, 2) + E.constant_form(box3, 2, [1, 0, 1]))
    assert cli.main(["decompose", str(p)]) == 0
    out = capsys.readouterr().out
    w = float(out.split("|w|=")[1].split()[0])
    norms = _norms(out)
    assert abs(sum(v * v for v in norms.values()) - w * w) <= 1e-9 * w * w


def test_decompose_state_snapshot(tmp_path, box3, capsys):
    p = tmp_path / "s.nfrm"
    write_snapshot(p, mhd.make_initial(box3, mhd.Closure(), 2))
    assert cli.main(["decompose", str(p)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("u:") and "\nB:" in out


def test_decompose_rejects_top_form(tmp_path, box2, capsys):
    p = tmp_path / "w.nfrm"
    write_snapshot(p, E.zero_form(box2, 2))
    assert cli.main(["decompose", str(p)]) == 2


# -- equilibrium -------------------------------------------------------------------------------------


def test_equilibrium_beltrami(capsys):
    assert cli.main(["equilibrium", "beltrami3", "1", "1", "1"]) == 0
    assert "force_res" in capsys.readouterr().out


def test_equilibrium_slab(capsys):
    assert cli.main(["equilibrium", "slab2"]) == 0


def test_equilibrium_noise_fails(capsys):
    assert cli.main(["equilibrium", "slab2", "--noise", "0.01"]) == 1


def test_equilibrium_unknown(capsys):
    assert cli.main(["equilibrium", "hopf"]) == 2


def test_equilibrium_snapshot_feeds_invariants(tmp_path, capsys):
    p = tmp_path / "eq.nfrm"
    assert cli.main(["equilibrium", "beltrami3", "--snapshot", str(p)]) == 0
    assert cli.main(["invariants", str(p), "--closure", "incompressible"]) == 0
