"""Execute a validated scenario and write its CSV and JSON outputs."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import fock
from .channel import BroadcastMatrix, balanced_two_user
from .coherent import CoherentScenario, number_state_intensity, photon_statistics, propagate
from .errors import CapacityError
from .filters import (
    CoefficientSeries,
    FilterPair,
    coefficients_csv,
    filter_csv,
    response_csv,
    user_coefficients,
)
from .scenario import Scenario
from .serialize import csv_text, dumps, write
from .twouser import filtered_coefficients, photon_stats, total_variation


def _is_balanced_two_user(coupler: BroadcastMatrix) -> bool:
    return coupler.m == 2 and np.array_equal(coupler.entries, balanced_two_user().entries)


def _intensity_rows(sc: Scenario, fp: FilterPair, coupler, codes, r: int) -> list[list]:
    grid = sc.grid
    if sc.state_kind == "coherent":
        csc = CoherentScenario(sc.alphas(), tuple(codes), coupler, fp, grid, r, sc.active())
        photons = propagate(csc).chip_intensity
    else:
        photons = number_state_intensity(sc.photons(), codes, coupler, fp, r)
    q = np.arange(photons.size)
    per_s = photons * grid.n_c / grid.t_p
    return [[int(i), float(i), grid.time_of_segment(i).item(), p, ps] for i, p, ps in zip(q, photons, per_s)]


def _fock_engine_pmf(sc: Scenario, fp, coupler, codes, receivers) -> dict[int, list[float]]:
    run = fock.propagate(sc.photons(), codes, coupler, fp, receivers=receivers,
                         n_max=sc.run.n_max, mode_cap=sc.run.mode_cap)
    out = {}
    for r in receivers:
        port = lambda m, r=r: m.stage == fock.OUTPUT and m.unit == r and m.port == fock.PORT_T
        out[r] = fock.photon_distribution(run.filtered, port).tolist()
    return out


def _single_photon_stats(sc: Scenario, fp, coupler, codes, r: int) -> dict:
    photons = sc.photons()
    on = [s for s, n in enumerate(photons) if n]
    if not on:
        return {"kind": "fock", "route": "closed-form", "exact_pmf": [1.0]}
    if len(on) == 1:
        s = on[0]
        p1 = abs(coupler.entries[r, s]) ** 2 * user_coefficients(fp, codes, s, r).transmitted
        return {"kind": "fock", "route": "closed-form", "active": on, "exact_pmf": [1 - p1, p1]}
    if len(on) == 2 and _is_balanced_two_user(coupler):
        own, other = codes[r], codes[1 - r]
        cf = filtered_coefficients(own, other, fp)
        exact = cf.exact_pmf()
        approx = photon_stats({0, 1}, cf)
        return {
            "kind": "fock", "route": "closed-form", "active": on,
            "exact_pmf": exact.tolist(), "approx_pmf": approx.tolist(),
            "total_variation": total_variation(exact, approx), "coefficients": cf.record(),
        }
    budget = fock.mode_budget(fp, sc.system.n_c, coupler.m)
    if budget > sc.run.mode_cap:
        raise CapacityError(
            f"no closed form for this user set and the Fock engine needs {budget} modes, "
            f"above run.mode_cap={sc.run.mode_cap}"
        )
    return {"kind": "fock", "route": "engine", "active": on,
            "exact_pmf": _fock_engine_pmf(sc, fp, coupler, codes, [r])[r]}


def _coherent_stats(sc: Scenario, fp, coupler, codes, r: int) -> dict:
    out = propagate(CoherentScenario(sc.alphas(), tuple(codes), coupler, fp, sc.grid, r, sc.active()))
    total = photon_statistics(out, "total_energy")
    proj = photon_statistics(out, "mode_projected")
    return {
        "kind": "poisson",
        "mean_total_energy": total.mean,
        "mean_mode_projected": proj.mean,
        "pmf": total.pmf().tolist(),
        "pmf_mode_projected": proj.pmf().tolist(),
    }


def _sweep_row(args) -> list[list]:
    sc, fp, seed = args
    codes = sc.build_codes(seed)
    rows = []
    for r in sc.receivers:
        for s in range(sc.system.m):
            cs = user_coefficients(fp, codes, s, r)
            rows.append([seed, s, r, cs.transmitted, cs.reflected])
    return rows


def run_scenario(sc: Scenario, out_dir: Path, jobs: int = 1) -> dict:
    """Write the requested outputs; returns the summary record."""
    out_dir = Path(out_dir)
    codes = sc.build_codes()
    coupler = sc.build_coupler()
    fp = sc.build_filter()
    files = []
    if "filter" in sc.run.outputs:
        files.append(write(out_dir / "filter_taps.csv", filter_csv(fp)))
        files.append(write(out_dir / "filter_response.csv", response_csv(fp)))
    if "coefficients" in sc.run.outputs:
        series: dict[str, CoefficientSeries] = {}
        for r in sc.receivers:
            for s in range(sc.system.m):
                series[f"s{s}_r{r}"] = user_coefficients(fp, codes, s, r)
        files.append(write(out_dir / "coefficients.csv", coefficients_csv(series)))
    if "intensity" in sc.run.outputs:
        header = ["q", "t_over_tc", "t_seconds", "photons", "photons_per_second"]
        for r in sc.receivers:
            rows = _intensity_rows(sc, fp, coupler, codes, r)
            files.append(write(out_dir / f"intensity_r{r}.csv", csv_text(header, rows)))
    stats = {}
    if "photon_stats" in sc.run.outputs:
        if sc.state_kind == "coherent" or sc.state_kind == "off":
            stats = {str(r): _coherent_stats(sc, fp, coupler, codes, r) for r in sc.receivers}
        elif sc.run.engine == "fock":
            pmfs = _fock_engine_pmf(sc, fp, coupler, codes, sc.receivers)
            stats = {str(r): {"kind": "fock", "route": "engine", "exact_pmf": p} for r, p in pmfs.items()}
        else:
            stats = {str(r): _single_photon_stats(sc, fp, coupler, codes, r) for r in sc.receivers}
        files.append(write(out_dir / "photon_stats.json", dumps({"receivers": stats})))
    if sc.run.seeds:
        tasks = [(sc, fp, seed) for seed in sc.run.seeds]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                chunks = list(pool.map(_sweep_row, tasks))
        else:
            chunks = [_sweep_row(t) for t in tasks]
        rows = [row for chunk in chunks for row in chunk]
        header = ["seed", "user", "receiver", "transmitted", "reflected"]
        files.append(write(out_dir / "sweep.csv", csv_text(header, rows)))
    summary = {
        "codes": [c.tolist() for c in codes],
        "coupler": [[[z.real, z.imag] for z in row] for row in coupler.entries],
        "filter": {
            "mode": fp.mode, "n_taps": fp.n_taps, "q_delay": fp.q_delay,
            "unitarity_defect": fp.unitarity_defect, "power_defect": fp.power_defect,
            "cross_defect": fp.cross_defect, "notes": list(fp.notes),
        },
        "files": sorted(p.name for p in files),
    }
    write(out_dir / "summary.json", dumps(summary))
    return summary
