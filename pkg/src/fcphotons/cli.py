"""Command-line front end: simulate, analyze, fit, reproduce."""

import argparse
import os
import sys

import numpy as np

from . import io, models, simkit, spectral, tagcorr, twophoton
from .scenario import Scenario, ScenarioError, franson_phases, load_scenario

FIGURE_IDS = ("fig2", "fig3", "fig4", "fig5b", "fig5c")


class CliError(Exception):
    pass


def _pair_coherence_for(scenario: Scenario):
    """Model pair coherence: source envelope x converter-filtered envelope."""
    s = scenario.source_spectrum()
    filtered = spectral.apply_phase_matching(s, scenario.phase_matching)
    env_a = spectral.coherence_envelope(s, tau_max=40.0, n_points=2001)
    env_b = spectral.coherence_envelope(filtered, tau_max=40.0, n_points=2001)
    return twophoton.pair_coherence(env_a, env_b)


def _simulate_g2_chain(scenario: Scenario, out_dir, seed):
    rng = np.random.default_rng(seed)
    herald, signal = simkit.generate_pair_streams(scenario.source, scenario.duration_ps, rng)
    if scenario.qfc_efficiency is not None:
        signal = simkit.qfc_transform(signal, scenario.qfc_efficiency,
                                      scenario.qfc_background_per_s, rng)
    hbt1, hbt2 = simkit.hbt_split(signal, rng, channels=(1, 2))
    herald = simkit.apply_detector(herald, scenario.detector_herald, rng)
    hbt1 = simkit.apply_detector(hbt1, scenario.detector_signal, rng)
    hbt2 = simkit.apply_detector(hbt2, scenario.detector_signal, rng)
    files = {}
    for label, stream in (("herald", herald), ("hbt1", hbt1), ("hbt2", hbt2)):
        fn = f"{label}.ptag"
        io.write_ptag(os.path.join(out_dir, fn), stream)
        files[label] = fn
    summary = {
        "kind": "g2_chain",
        "name": scenario.name,
        "seed": seed,
        "duration_ps": scenario.duration_ps,
        "files": files,
        "counts": {"herald": int(herald.tags.size), "hbt1": int(hbt1.tags.size),
                   "hbt2": int(hbt2.tags.size)},
        "rates_per_s": {"herald": herald.rate_per_s, "hbt1": hbt1.rate_per_s,
                        "hbt2": hbt2.rate_per_s},
    }
    io.write_summary(os.path.join(out_dir, "summary.json"), summary)
    return summary


def _simulate_franson(scenario: Scenario, out_dir, seed):
    fr = scenario.franson
    pc = _pair_coherence_for(scenario)
    cfg = simkit.FransonMcConfig(
        pc=pc,
        delay_imbalance_ps=fr.delay_imbalance_ps,
        delay_ps=fr.delay_ps,
        v_app=fr.v_mi * fr.v_mzi,
        detector_a=scenario.detector_herald,
        detector_b=scenario.detector_signal,
        gate_ps=scenario.analysis.gate_ps,
    )
    rng = np.random.default_rng(seed)
    phases = franson_phases(fr.phase_points)
    files = []
    for k, phi in enumerate(phases):
        n_pairs = rng.poisson(fr.pairs_per_point)
        if scenario.duration_ps > 0 and n_pairs > 0:
            pair_times = np.sort(rng.integers(0, scenario.duration_ps, n_pairs,
                                              dtype=np.int64))
        else:
            pair_times = np.empty(0, dtype=np.int64)
        cfg_k = simkit.FransonMcConfig(
            pc=pc, delay_imbalance_ps=cfg.delay_imbalance_ps, delay_ps=cfg.delay_ps,
            phase_rad=float(phi), v_app=cfg.v_app, detector_a=cfg.detector_a,
            detector_b=cfg.detector_b, gate_ps=cfg.gate_ps)
        a, b = simkit.franson_sample(pair_times, cfg_k, rng)
        fa, fb = f"franson_a_{k:03d}.ptag", f"franson_b_{k:03d}.ptag"
        io.write_ptag(os.path.join(out_dir, fa), a)
        io.write_ptag(os.path.join(out_dir, fb), b)
        files.append({"phase_rad": float(phi), "a": fa, "b": fb})
    summary = {
        "kind": "franson",
        "name": scenario.name,
        "seed": seed,
        "delay_ps": fr.delay_ps,
        "delay_imbalance_ps": fr.delay_imbalance_ps,
        "gate_ps": scenario.analysis.gate_ps,
        "configured_visibility": fr.v_mi * fr.v_mzi * pc.at(float(fr.delay_imbalance_ps)),
        "scan": files,
    }
    io.write_summary(os.path.join(out_dir, "summary.json"), summary)
    return summary


def cmd_simulate(args):
    try:
        scenario = load_scenario(args.scenario)
    except ScenarioError as exc:
        raise CliError(str(exc)) from exc
    os.makedirs(args.out, exist_ok=True)
    seed = args.seed if args.seed is not None else scenario.seed
    if scenario.kind == "g2_chain":
        _simulate_g2_chain(scenario, args.out, seed)
    else:
        _simulate_franson(scenario, args.out, seed)
    return 0


def _read_single(path):
    streams = io.read_ptag(path)
    if not streams:
        return None
    if len(streams) > 1:
        raise CliError(f"{path}: expected a single channel")
    return streams[0]


def _analyze_g2(args, out_dir):
    herald = _read_single(args.tags[0])
    hbt1 = _read_single(args.tags[1])
    hbt2 = _read_single(args.tags[2])
    summary = {"mode": "g2"}
    if herald is None or herald.tags.size == 0:
        summary["status"] = "insufficient data"
        io.write_summary(os.path.join(out_dir, "analysis.json"), summary)
        return 0
    window = args.window_ps
    bin_ps = args.bin_ps if args.bin_ps else window
    try:
        res = tagcorr.heralded_g2(herald, hbt1, hbt2, window)
        hist = tagcorr.cross_correlate(herald, hbt1, bin_ps, args.delay_range_ps)
        sbr = tagcorr.extract_sbr(hist, bin_ps, args.background_exclusion_ps)
    except tagcorr.AnalysisError as exc:
        summary["status"] = "insufficient data"
        summary["detail"] = str(exc)
        io.write_summary(os.path.join(out_dir, "analysis.json"), summary)
        return 0
    io.save_curve(os.path.join(out_dir, "g2_histogram.csv"),
                  res.m_values, res.histogram, ("herald_separation_m", "pairs"))
    io.save_curve(os.path.join(out_dir, "correlation.csv"),
                  hist.delays_ps, hist.bins, ("delay_ps", "counts"))
    summary.update({
        "status": "ok",
        "g2_zero": res.g2_zero,
        "sigma": res.sigma,
        "sbr": sbr.sbr,
        "sbr_sigma": sbr.sigma,
        "g2_from_sbr": models.g2_from_sbr(max(sbr.sbr, 0.0)),
    })
    io.write_summary(os.path.join(out_dir, "analysis.json"), summary)
    return 0


def _analyze_sbr(args, out_dir):
    a = _read_single(args.tags[0])
    b = _read_single(args.tags[1])
    summary = {"mode": "sbr"}
    if a is None or b is None or a.tags.size == 0 or b.tags.size == 0:
        summary["status"] = "insufficient data"
        io.write_summary(os.path.join(out_dir, "analysis.json"), summary)
        return 0
    bin_ps = args.bin_ps if args.bin_ps else args.window_ps
    hist = tagcorr.cross_correlate(a, b, bin_ps, args.delay_range_ps)
    try:
        sbr = tagcorr.extract_sbr(hist, bin_ps, args.background_exclusion_ps)
    except tagcorr.AnalysisError as exc:
        summary["status"] = "insufficient data"
        summary["detail"] = str(exc)
        io.write_summary(os.path.join(out_dir, "analysis.json"), summary)
        return 0
    io.save_curve(os.path.join(out_dir, "correlation.csv"),
                  hist.delays_ps, hist.bins, ("delay_ps", "counts"))
    summary.update({"status": "ok", "sbr": sbr.sbr, "sigma": sbr.sigma,
                    "signal": sbr.signal, "background_per_bin": sbr.background_per_bin})
    io.write_summary(os.path.join(out_dir, "analysis.json"), summary)
    return 0


def _analyze_franson(args, out_dir):
    run_dir = args.tags[0]
    summary_path = os.path.join(run_dir, "summary.json")
    if not os.path.exists(summary_path):
        raise CliError(f"{run_dir}: no summary.json from a franson simulate run")
    run = io.read_summary(summary_path)
    if run.get("kind") != "franson":
        raise CliError(f"{run_dir}: not a franson run")
    gate = args.gate_ps if args.gate_ps else run["gate_ps"]
    scans = []
    for entry in run["scan"]:
        a = _read_single(os.path.join(run_dir, entry["a"]))
        b = _read_single(os.path.join(run_dir, entry["b"]))
        if a is None or b is None:
            scans.append((entry["phase_rad"], 0))
            continue
        scans.append((entry["phase_rad"],
                      tagcorr.gated_coincidences(a, b, gate, center_ps=0.0)))
    summary = {"mode": "franson", "gate_ps": gate}
    total = sum(c for _, c in scans)
    if total == 0:
        summary["status"] = "insufficient data"
        io.write_summary(os.path.join(out_dir, "analysis.json"), summary)
        return 0
    vis, sigma = tagcorr.franson_visibility_scan(scans)
    bell = twophoton.bell_check(vis, max(sigma, 1e-12))
    summary.update({
        "status": "ok",
        "visibility": vis,
        "sigma": sigma,
        "gated_coincidences": total,
        "bell_bound": bell.bound,
        "bell_violation_sigmas": bell.violation_sigmas,
        "classical_violation_sigmas": bell.classical_sigmas,
    })
    io.save_curve(os.path.join(out_dir, "franson_scan.csv"),
                  [p for p, _ in scans], [c for _, c in scans],
                  ("phase_rad", "gated_counts"))
    io.write_summary(os.path.join(out_dir, "analysis.json"), summary)
    return 0


def cmd_analyze(args):
    os.makedirs(args.out, exist_ok=True)
    if args.mode == "g2":
        if len(args.tags) != 3:
            raise CliError("g2 mode needs herald, hbt1, hbt2 tag files")
        return _analyze_g2(args, args.out)
    if args.mode == "sbr":
        if len(args.tags) != 2:
            raise CliError("sbr mode needs two tag files")
        return _analyze_sbr(args, args.out)
    if len(args.tags) != 1:
        raise CliError("franson mode takes the simulate output directory")
    return _analyze_franson(args, args.out)


def cmd_fit(args):
    rows = []
    with open(args.points, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                continue
    if len(rows) < 2:
        raise CliError(f"{args.points}: need at least two data rows")
    try:
        res = models.fit_sbr(rows, args.dt_s)
    except models.ModelError as exc:
        raise CliError(str(exc)) from exc
    os.makedirs(args.out, exist_ok=True)
    io.write_summary(os.path.join(args.out, "fit.json"), {
        "a": res.a,
        "b": res.b,
        "b_at_boundary": res.b_at_boundary,
        "covariance": res.covariance.tolist(),
        "dt_s": args.dt_s,
    })
    return 0


def _reproduce_fig2(out_dir):
    s = spectral.default_source_spectrum()
    env = spectral.coherence_envelope(s, tau_max=12.0, n_points=1201)
    params = "synthetic Gaussian source line, 173 GHz FWHM; apparatus ceiling 0.88"
    io.save_curve(os.path.join(out_dir, "fig2_spectrum.csv"),
                  s.nu_grid, s.intensity, ("nu_GHz", "intensity"), comment=params)
    io.save_curve(os.path.join(out_dir, "fig2_visibility.csv"),
                  env.tau_grid, 0.88 * env.magnitude, ("tau_ps", "visibility"),
                  comment=params)


def _reproduce_fig3(out_dir):
    s = spectral.default_source_spectrum()
    pm = spectral.PhaseMatching(fwhm_ghz=118.0)
    filtered = spectral.apply_phase_matching(s, pm)
    env = spectral.coherence_envelope(filtered, tau_max=25.0, n_points=2001)
    tau_c = spectral.coherence_time(env)
    bw = spectral.integral_bandwidth(filtered)
    params = (f"source Gaussian 173 GHz FWHM x sinc^2 filter 118 GHz FWHM; "
              f"coherence_time_ps={tau_c:.4f}; bandwidth_ghz={bw:.3f}; apparatus ceiling 0.88")
    io.save_curve(os.path.join(out_dir, "fig3_spectrum.csv"),
                  filtered.nu_grid, filtered.intensity, ("nu_GHz", "intensity"),
                  comment=params)
    io.save_curve(os.path.join(out_dir, "fig3_visibility.csv"),
                  env.tau_grid, 0.88 * env.magnitude, ("tau_ps", "visibility"),
                  comment=params)


def _reproduce_fig4(out_dir):
    s = spectral.default_source_spectrum()
    filtered = spectral.apply_phase_matching(s, spectral.PhaseMatching(fwhm_ghz=118.0))
    env_a = spectral.coherence_envelope(s, tau_max=40.0, n_points=2001)
    env_b = spectral.coherence_envelope(filtered, tau_max=40.0, n_points=2001)
    pc = twophoton.pair_coherence(env_a, env_b)
    curve = twophoton.expected_visibility_curve(pc, 0.88, 0.95)
    keep = np.abs(curve.tau) <= 40.0
    params = "v(dtau) = 0.88 * 0.95 * F(dtau); peak 0.836"
    io.save_curve(os.path.join(out_dir, "fig4_visibility_vs_imbalance.csv"),
                  curve.tau[keep], curve.visibility[keep],
                  ("delay_imbalance_ps", "visibility"), comment=params)


def _reproduce_fig5(out_dir, which):
    # start above zero: presets with no background have SBR -> infinity at R=0
    rates = np.linspace(2.0e3, 4.0e5, 200)
    cols = {}
    for name, preset in models.RATE_MODEL_PRESETS.items():
        sbr = np.array([models.sbr_model(r, preset) for r in rates])
        cols[name] = sbr if which == "fig5c" else np.array(
            [models.g2_from_sbr(v) for v in sbr])
    label = "sbr" if which == "fig5c" else "g2_zero"
    path = os.path.join(out_dir, f"{which}_{label}_vs_herald_rate.csv")
    names = list(models.RATE_MODEL_PRESETS)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# SBR model 1/(dt*(a*R+b)), dt=1.5e-9 s; presets: "
                 + "; ".join(f"{n}: a={models.RATE_MODEL_PRESETS[n].a}, "
                             f"b={models.RATE_MODEL_PRESETS[n].b:g}" for n in names)
                 + "\n")
        fh.write("herald_rate_per_s," + ",".join(f"{label}_{n}" for n in names) + "\n")
        for i, r in enumerate(rates):
            fh.write(f"{r!r}," + ",".join(repr(float(cols[n][i])) for n in names) + "\n")


def cmd_reproduce(args):
    if args.figure not in FIGURE_IDS:
        raise CliError(f"unknown figure id {args.figure!r}; choose from {FIGURE_IDS}")
    os.makedirs(args.out, exist_ok=True)
    if args.figure == "fig2":
        _reproduce_fig2(args.out)
    elif args.figure == "fig3":
        _reproduce_fig3(args.out)
    elif args.figure == "fig4":
        _reproduce_fig4(args.out)
    else:
        _reproduce_fig5(args.out, args.figure)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fcphotons",
        description="Simulate and analyze frequency-converted heralded single photons.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scenario and write PTAG tag files")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="analyze tag files (g2, sbr or franson)")
    p.add_argument("tags", nargs="+",
                   help="tag files (g2: herald hbt1 hbt2; sbr: two files; "
                        "franson: simulate output dir)")
    p.add_argument("--mode", choices=("g2", "sbr", "franson"), default="g2")
    p.add_argument("--out", required=True)
    p.add_argument("--bin-ps", type=int, default=0, dest="bin_ps")
    p.add_argument("--gate-ps", type=int, default=0, dest="gate_ps")
    p.add_argument("--window-ps", type=int, default=1500, dest="window_ps")
    p.add_argument("--delay-range-ps", type=int, default=150000, dest="delay_range_ps")
    p.add_argument("--background-exclusion-ps", type=int, default=15000,
                   dest="background_exclusion_ps")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("fit", help="fit SBR points with the linear rate model")
    p.add_argument("points", help="CSV of herald_rate_per_s,sbr[,sigma]")
    p.add_argument("--dt-s", type=float, required=True, dest="dt_s")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("reproduce", help="emit model curves for a figure id")
    p.add_argument("figure", choices=FIGURE_IDS)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
