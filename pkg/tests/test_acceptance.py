"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line (printed in the "acceptance criteria"
section of the pytest summary) and then asserts.  Criteria that do not hold
as literally worded are run as worded and fail; the sub-criterion next to
each one checks the statement that does hold.

Run alone with ``pytest tests/test_acceptance.py -v``.
"""
import math
import subprocess
import sys

import numpy as np
import pytest

from multlag.dynamics import (
    Flow, compare_trajectories, conserved_drift, integrate_hamiltonian, integrate_lagrangian,
)
from multlag.hamiltonians import H_additive_nr, H_additive_rel, HamiltonianModel, kinetic_momentum, legendre_numeric
from multlag.hierarchy import (
    MAX_ORDER, hamiltonian_series, hier_coefficients_nr, recurrence_check_nr, series_reconstruct_nr,
    series_reconstruct_rel,
)
from multlag.lagrangians import Family, LagrangianModel, ModelParams
from multlag.potentials import Harmonic
from multlag.verify import PRINTED_TABLES, Scenario, legendre_deviations, p_function_deviations, run_suite

TWO_PI = 2 * math.pi
UNIT = ModelParams()


def _worst(report):
    failed = [c for c in report.checks if not c.passed]
    if not failed:
        return f"{len(report.checks)} checks"
    c = failed[0]
    return f"{len(failed)}/{len(report.checks)} checks fail, first {c.name} = {c.value!r} (tol {c.tolerance!r})"


# 1 -----------------------------------------------------------------------------------

def test_c1_eom_equivalence(criterion):
    rep = run_suite("eom", Scenario())
    resid = max(c.value for c in rep.checks if c.name.endswith("max_abs_residual"))
    skipped = sum(c.value for c in rep.checks if c.name.endswith("degenerate_points_skipped"))
    ok = rep.passed and resid < 1e-8
    criterion("1 eom equivalence", ok, f"max residual {resid:.2e} < 1e-8 over {len(rep.checks) // 2} "
                                       f"scans, {skipped} degenerate points skipped")
    assert ok, _worst(rep)


# 2 -----------------------------------------------------------------------------------

def _legendre(samples=100):
    out = {}
    for fam in Family:
        j = 3 if fam.hierarchical else None
        model = LagrangianModel(fam, UNIT, Harmonic(), j)
        rng = np.random.default_rng(7)
        vmax = 0.9 if fam.relativistic else 1.0
        pts = list(zip(rng.uniform(-1, 1, samples), rng.uniform(-vmax, vmax, samples)))
        out[fam] = legendre_deviations(model, pts)
    return out


@pytest.fixture(scope="module")
def legendre_devs():
    return _legendre()


def test_c2_legendre_at_canonical_momentum(criterion, legendre_devs):
    devs = {f.value: can for f, (can, _) in legendre_devs.items()}
    ok = all(d < 1e-10 for d in devs.values())
    criterion("2 legendre (H at p = dL/dv)", ok,
              "max rel dev " + ", ".join(f"{k} {v:.1e}" for k, v in devs.items()))
    assert ok


def test_c2b_legendre_at_kinetic_momentum(criterion, legendre_devs):
    devs = {f.value: kin for f, (_, kin) in legendre_devs.items()}
    ok = all(d < 1e-10 for d in devs.values())
    criterion("2b legendre (H at p = m v, gamma m v)", ok, f"max rel dev {max(devs.values()):.1e} < 1e-10")
    assert ok


# 3 -----------------------------------------------------------------------------------

def test_c3_limit_orders(criterion):
    rep = run_suite("limits", Scenario())
    slopes = {c.name: c.value for c in rep.checks if "slope" in c.name}
    detail = ", ".join(f"{k.split(':')[1]}{'(c)' if k.startswith('c_') else ''} {v:.3f}" for k, v in slopes.items())
    criterion("3 limit orders", rep.passed, f"slopes {detail}; double limit monotone")
    assert rep.passed, _worst(rep)


# 4 -----------------------------------------------------------------------------------

def test_c4_hierarchy_identities(criterion):
    from fractions import Fraction

    tables = all(hier_coefficients_nr(j) == [Fraction(*c) if isinstance(c, tuple) else c for c in PRINTED_TABLES[j]]
                 for j in (1, 2, 3))
    recur = max(recurrence_check_nr(j) for j in range(2, MAX_ORDER + 1))
    rng = np.random.default_rng(4)
    worst = 0.0
    for rel in (False, True):
        fam = Family.HIERARCHY_REL if rel else Family.HIERARCHY_NR
        for j in range(1, 7):
            model = LagrangianModel(fam, UNIT, Harmonic(), j)
            for x, v in zip(rng.uniform(-1, 1, 100), rng.uniform(-0.9, 0.9, 100)):
                p = kinetic_momentum(UNIT, v, rel)
                h = (H_additive_rel if rel else H_additive_nr)(UNIT, Harmonic(), x, p)
                worst = max(worst, abs(legendre_numeric(model, x, v) - h**j) / abs(h**j))
    ok = tables and recur == 0 and worst < 1e-10
    criterion("4 hierarchy identities", ok, f"tables j=1..3 exact: {tables}; recurrences j<=20 dev {recur}; "
                                            f"Legendre vs H^j max rel {worst:.1e}")
    assert ok


# 5 -----------------------------------------------------------------------------------

def test_c5_lagrangian_series(criterion):
    rng = np.random.default_rng(5)
    worst, used = 0.0, 0
    for lam in (1.5, 2.0, 3.0):
        prm = ModelParams(lam=lam)
        s = prm.energy_scale
        for x, v in zip(rng.uniform(-1, 1, 60), rng.uniform(-0.9, 0.9, 60)):
            if (0.5 * v * v + Harmonic().V(x)) / s <= 0.5:
                r = series_reconstruct_nr(prm, Harmonic(), x, v, 12)
                worst = max(worst, r.residual / abs(r.target))
                used += 1
            if H_additive_rel(prm, Harmonic(), x, kinetic_momentum(prm, v, True)) / s <= 0.5:
                r = series_reconstruct_rel(prm, Harmonic(), x, v, 12)
                worst = max(worst, r.residual / abs(r.target))
                used += 1
    ok = worst < 1e-8
    criterion("5a lagrangian series J=12", ok, f"max rel residual {worst:.1e} < 1e-8 at {used} in-regime points")
    assert ok


def test_c5_hamiltonian_series_nonrelativistic(criterion):
    r = hamiltonian_series(UNIT, Harmonic(), 1.0, 1.0, 15)
    ok = r.residual < 1e-12
    criterion("5b hamiltonian series J=15 (H_N = 1)", ok, f"residual {r.residual:.2e} < 1e-12")
    assert ok


def test_c5_hamiltonian_series_relativistic(criterion):
    r = hamiltonian_series(UNIT, Harmonic(), 0.0, 0.75, 15, relativistic=True)
    tail = 1.25**16 / math.factorial(16)
    ok = r.residual < 1e-12
    criterion("5c hamiltonian series J=15 (H_c = 1.25)", ok,
              f"residual {r.residual:.2e} vs 1e-12; first dropped term 1.25^16/16! = {tail:.2e}")
    assert ok


# 6 -----------------------------------------------------------------------------------

def test_c6_p_functions(criterion):
    devs = p_function_deviations(1.0, 61)
    ok = devs[1] < 1e-10 and devs[3] < 1e-10 and devs[2] > 0 and devs[4] > 0
    criterion("6 P-functions", ok, f"P1 {devs[1]:.1e}, P3 {devs[3]:.1e} (< 1e-10); printed P2 off by "
                                   f"{devs[2]:.2f}, printed P4 off by {devs[4]:.2f} (relative, reported)")
    assert ok


# 7 -----------------------------------------------------------------------------------

FAMILY_J = [(Family.ADDITIVE_NR, None), (Family.MULTIPLICATIVE_NR, None), (Family.HIERARCHY_NR, 3),
            (Family.ADDITIVE_REL, None), (Family.MULTIPLICATIVE_REL, None), (Family.HIERARCHY_REL, 3)]
N_PERIOD = math.ceil(TWO_PI / 1e-3)


def test_c7a_lagrangian_trajectories_agree(criterion):
    worst = {}
    base = {rel: integrate_lagrangian(LagrangianModel(Family.ADDITIVE_REL if rel else Family.ADDITIVE_NR, UNIT,
                                                      Harmonic()), 1.0, 0.0, 1e-3, N_PERIOD)
            for rel in (False, True)}
    for fam, j in FAMILY_J:
        traj = integrate_lagrangian(LagrangianModel(fam, UNIT, Harmonic(), j), 1.0, 0.0, 1e-3, N_PERIOD)
        worst[fam.value] = max(compare_trajectories(base[fam.relativistic], traj))
    ok = all(d < 1e-7 for d in worst.values())
    criterion("7a trajectories agree, 1 period", ok,
              "sup-norm " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))
    assert ok


def _ham(fam, j):
    return HamiltonianModel(fam, UNIT, Harmonic(), j)


@pytest.mark.xfail(strict=True, reason="H = f(H_std) runs f'(H_std) times faster; 7c checks the rescaled flow")
def test_c7b_canonical_flow_agrees_literally(criterion):
    worst = {}
    for fam, j in FAMILY_J:
        base = Family.ADDITIVE_REL if fam.relativistic else Family.ADDITIVE_NR
        p0 = kinetic_momentum(UNIT, 0.5, fam.relativistic)
        a = integrate_hamiltonian(_ham(base, None), 1.0, p0, 1e-3, N_PERIOD, stride=10)
        b = integrate_hamiltonian(_ham(fam, j), 1.0, p0, 1e-3, N_PERIOD, stride=10)
        worst[fam.value] = compare_trajectories(a, b)[0]
    ok = all(d < 1e-7 for d in worst.values())
    criterion("7b canonical H-flow x(t) vs additive, unscaled (expected to fail)", ok,
              "sup-norm " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))
    assert ok


def test_c7c_rescaled_and_kinetic_flows_agree(criterion):
    worst_scaled, worst_kin = 0.0, 0.0
    for fam, j in FAMILY_J:
        model = _ham(fam, j)
        base = Family.ADDITIVE_REL if fam.relativistic else Family.ADDITIVE_NR
        p0 = kinetic_momentum(UNIT, 0.5, fam.relativistic)
        ref = integrate_hamiltonian(_ham(base, None), 1.0, p0, 1e-3, N_PERIOD, stride=10)
        kin = integrate_hamiltonian(model, 1.0, p0, 1e-3, N_PERIOD, flow=Flow.KINETIC, stride=10)
        worst_kin = max(worst_kin, compare_trajectories(ref, kin)[0])
        # same step count, steps shrunk by f'(H_std(0)): row k sits at additive time t_k
        scale = model.time_scale(1.0, p0)
        can = integrate_hamiltonian(model, 1.0, p0, 1e-3 / scale, N_PERIOD, stride=10)
        worst_scaled = max(worst_scaled, float(np.max(np.abs(can["x"] - ref["x"]))))
    ok = worst_scaled < 1e-7 and worst_kin < 1e-7
    criterion("7c rescaled canonical and kinetic H-flows vs additive", ok,
              f"sup-norm rescaled {worst_scaled:.1e}, kinetic {worst_kin:.1e} < 1e-7")
    assert ok


def test_c7d_conservation_100_periods(criterion):
    drifts = {}
    for fam, j in FAMILY_J:
        p0 = kinetic_momentum(UNIT, 0.5, fam.relativistic)
        traj = integrate_hamiltonian(_ham(fam, j), 1.0, p0, 1e-3, 100 * N_PERIOD, stride=1000)
        drifts[fam.value] = conserved_drift(traj)
    ok = all(d < 1e-6 for d in drifts.values())
    criterion("7d conserved_drift, 100 periods", ok,
              "drift " + ", ".join(f"{k} {v:.1e}" for k, v in drifts.items()))
    assert ok


def test_c7e_rk4_order(criterion):
    dts = [4e-3, 2e-3, 1e-3, 5e-4]
    errs = []
    for dt in dts:
        n = math.ceil(TWO_PI / dt)
        traj = integrate_hamiltonian(_ham(Family.ADDITIVE_NR, None), 1.0, 0.0, dt, n, stride=n)
        t = traj.t[-1]
        errs.append(math.hypot(traj["x"][-1] - math.cos(t), traj["p"][-1] + math.sin(t)))
    order = np.polyfit(np.log(dts), np.log(errs), 1)[0]
    ok = abs(order - 4) <= 0.2
    criterion("7e RK4 order", ok, f"fitted order {order:.3f} (phase-space error at t_n)")
    assert ok


# 8, 9 --------------------------------------------------------------------------------

def test_c8_two_body(criterion):
    rep = run_suite("twobody", Scenario())
    vals = {c.name: c.value for c in rep.checks}
    detail = (f"X'' {max(v for k, v in vals.items() if 'X_accel' in k):.1e}, "
              f"x'' {max(v for k, v in vals.items() if 'x_accel' in k):.1e}, P drift {vals['P_drift']:.1e}, "
              f"slopes L2 {vals['lambda_slope:L2']:.3f} H2 {vals['lambda_slope:H2']:.3f}")
    criterion("8 two-body", rep.passed, detail)
    assert rep.passed, _worst(rep)


def test_c9_lax(criterion):
    rep = run_suite("lax", Scenario())
    vals = {c.name: c.value for c in rep.checks}
    criterion("9 lax traces", rep.passed, f"even max rel {vals.get('even_trace_rel_dev', float('nan')):.1e}, "
                                          f"odd max abs {vals.get('odd_trace_abs', float('nan')):.1e}")
    assert rep.passed, _worst(rep)


# 10 ----------------------------------------------------------------------------------

CLI_RUNS = [
    ["integrate", "--family", "hier-rel", "--j", "2", "--steps", "200", "--dt", "0.005", "--summary", "{tmp}/s.json"],
    ["integrate", "--family", "mult-nr", "--formulation", "hamiltonian", "--steps", "300", "--method", "rk45",
     "--dt", "0.01", "--summary", "{tmp}/s.json"],
    ["verify", "legendre", "--samples", "20"],
    ["verify", "lax"],
    ["hierarchy", "table", "--j", "12"],
    ["hierarchy", "reconstruct", "--J", "12", "--relativistic"],
]


def test_c10_determinism(criterion, tmp_path):
    same = True
    for argv in CLI_RUNS:
        argv = [a.format(tmp=tmp_path) for a in argv]
        outs = []
        for _ in range(2):
            proc = subprocess.run([sys.executable, "-m", "multlag.cli", *argv], capture_output=True)
            side = (tmp_path / "s.json").read_bytes() if "--summary" in argv else b""
            outs.append((proc.returncode, proc.stdout, side))
        same = same and outs[0] == outs[1] and len(outs[0][1]) > 0
    criterion("10 determinism", same, f"{len(CLI_RUNS)} CLI invocations repeated byte-identically")
    assert same


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
