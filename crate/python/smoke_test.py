"""Quick checks of the Python bindings on a small grid."""

import math

import pairprobe_py as pp

SMALL = """
[grid]
r_max = 400.0
n_points = 1024

[initial]
manifolds = ["triplet"]

[delays]
max_ps = 300.0
step_ps = 2.0
"""


def main():
    assert abs(pp.convert(1.0, "cm-1", "GHz") - 29.9792458) < 1e-9
    assert abs(pp.bandwidth(10.0) - 1.47) < 0.0147

    r = pp.condon(-4.0)
    assert 72.0 < r < 80.0, r

    cfg = pp.RunConfig(SMALL)
    assert len(cfg.hash()) == 64
    assert pp.RunConfig(cfg.to_toml()).hash() == cfg.hash()

    levels = pp.bound_levels("triplet", 0, cfg)
    assert all(e < 0 for e in levels) and len(levels) > 10

    d = pp.phase(100.0, 0)
    assert math.isfinite(d)

    sig = pp.pump_probe(cfg)
    s0, recovery, contrast = sig.bleach(10.0)
    assert s0 < 0.5, s0
    assert recovery is not None and recovery > 10.0
    assert sig.to_csv().startswith("# config_hash=" + cfg.hash())

    t = [2.0 * i for i in range(256)]
    c = [math.cos(2 * math.pi * 0.37 * 0.0299792458 * x) for x in t]
    lines = pp.invert(t, c)
    assert abs(lines[0].frequency_cm1 - 0.37) < 1e-8, lines

    try:
        pp.RunConfig("[pulse]\nfwhm_ps = -1.0\n")
    except ValueError as e:
        assert "pulse.fwhm_ps" in str(e)
    else:
        raise AssertionError("invalid config accepted")

    print(f"ok: S(0+)={s0:.3f} recovery={recovery} ps, {len(levels)} triplet levels")


if __name__ == "__main__":
    main()
