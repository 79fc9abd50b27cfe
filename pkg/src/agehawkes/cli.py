"""Command line entry point: simulate, prepare, fit, forecast, lineage, metrics."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .core import load_config


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def cmd_simulate(args) -> None:
    from .sim import generate_synthetic

    cfg = load_config(args.config)
    gammas = io.read_gammas(args.truth_gammas)
    seeds = io.read_seeds(args.seeds)
    data = generate_synthetic(cfg, gammas, seeds, args.dispersion, _rng(args.seed))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_latent_events(out / "latent_events.csv", seeds, data.latent)
    io.write_observed(out / "observed.csv", data.observed)
    io.write_seeds(out / "seeds.csv", seeds)
    latent = np.array([s.counts_by_age for s in data.latent]).reshape(cfg.k, cfg.n_groups)
    with open(out / "latent_counts.csv", "w") as fh:
        fh.write("interval,age,count,susceptibles_start\n")
        for n in range(cfg.k):
            for a in range(cfg.n_groups):
                fh.write(f"{n + 1},{a},{latent[n, a]},{data.susceptibles[n, a]}\n")
    io.write_manifest(out / "run_manifest.json", cfg, "simulate", args.argv, seed=args.seed,
                      dispersion=args.dispersion)


def cmd_prepare(args) -> None:
    cfg = load_config(args.config)
    mapping = json.loads(Path(args.bands).read_text())
    start = args.start_date or cfg.start_date
    if start is None:
        raise ValueError("no start date: pass --start-date or set start_date in the config")
    Y, daily = io.ingest_cases(args.cases, mapping, cfg.grid, start, cfg.n_groups)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_observed(out / "observed.csv", Y)
    offset, counts = daily.relative(io._parse_date(start))
    seeds = io.init_seed_history(counts, cfg.beta, cfg.grid.t0, first_day=offset,
                                 rng=_rng(args.seed) if args.jitter else None)
    io.write_seeds(out / "seeds.csv", seeds)
    io.write_manifest(out / "run_manifest.json", cfg, "prepare", args.argv, seed=args.seed,
                      jitter=args.jitter, n_seeds=len(seeds))


def cmd_fit(args) -> None:
    from .kdpf import FilterConfig, run_filter

    cfg = load_config(args.config)
    Y = io.read_observed(args.observed, cfg.k, cfg.n_groups)
    seeds_path = args.seeds or Path(args.observed).with_name("seeds.csv")
    seeds = io.read_seeds(seeds_path)
    fcfg = FilterConfig(n_particles=args.particles, seed=args.seed, lag=args.lag, discount=args.discount,
                        rescue=args.rescue, intensity_draws=args.intensity_draws, r_weighting=args.r_weighting,
                        history_particles=args.history_particles)
    res = run_filter(cfg, fcfg, seeds, Y)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(res.summary.to_json())
    labels = list(cfg.ages.labels)
    b = res.summary.bands
    start = int(np.floor(cfg.grid.t0))
    if "intensity" in b:
        io.write_band_csv(out / "intensity.csv", b["intensity"], labels, start=start)
        io.write_band_csv(out / "intensity_total.csv", b["intensity_total"], labels, start=start)
    io.write_band_csv(out / "latent_daily.csv", b["latent_daily"], labels, start=start)
    res.archive(fcfg.history_particles).save(out / "particles.bin")
    io.write_manifest(out / "run_manifest.json", cfg, "fit", args.argv, seed=args.seed,
                      particles=args.particles, lag=args.lag, final_particles=res.population.N)


def cmd_forecast(args) -> None:
    from .kdpf import ParticleArchive, forecast_next_interval

    archive = ParticleArchive.load(args.archive)
    fc = forecast_next_interval(archive, archive.cfg, _rng(args.seed), args.draws_per_particle)
    Path(args.out).write_text(json.dumps(fc.to_dict(), indent=1, sort_keys=True))


def cmd_lineage(args) -> None:
    from .lineage import links_from_arrays, links_from_history, links_method_b

    if (args.events is None) == (args.archive is None):
        raise ValueError("give exactly one of --events or --archive")
    rng = _rng(args.seed)
    if args.events is not None:
        ev = io.read_latent_events(args.events)
        A = int(ev["age"].max()) + 1 if len(ev["age"]) else 0
        if args.method == "a":
            result = {"method": "a", "links": links_from_arrays(ev["age"], ev["parent_id"], A, ev["id"]).to_dict()}
        else:
            if args.config is None:
                raise ValueError("method b needs --config for the kernel and contact matrix")
            cfg = load_config(args.config)
            post = links_method_b(ev["time"], ev["age"], ev["parent_id"] < 0, cfg, args.draws, rng)
            result = {"method": "b", "draws": args.draws, "orphans": post.orphans,
                      "links": post.to_dict(list(cfg.ages.labels))}
    else:
        from .kdpf import ParticleArchive

        archive = ParticleArchive.load(args.archive)
        cfg = archive.cfg
        A = cfg.n_groups
        mats = []
        for h in archive.histories[: args.draws]:
            if args.method == "a":
                mats.append(links_from_history(h, A, len(archive.seeds)).counts)
            else:
                times = np.r_[archive.seeds.times, h["time"]]
                ages = np.r_[archive.seeds.ages, h["age"]]
                seed = np.r_[np.ones(len(archive.seeds), bool), np.zeros(len(h["time"]), bool)]
                mats.append(links_method_b(times, ages, seed, cfg, 1, rng).draws[0])
        mats = np.array(mats).reshape(-1, A, A)
        lo, med, hi = np.quantile(mats, [0.005, 0.5, 0.995], axis=0)
        labels = list(cfg.ages.labels)
        result = {"method": args.method, "particles": len(mats), "links": {
            f"{labels[i]}->{labels[j]}": {"median": float(med[i, j]), "lo99": float(lo[i, j]), "hi99": float(hi[i, j])}
            for i in range(A) for j in range(A)}}
    Path(args.out).write_text(json.dumps(result, indent=1, sort_keys=True))


def cmd_metrics(args) -> None:
    from .diagnostics import mcse, pae

    result = {}
    if args.mcse:
        rows = []
        for p in args.mcse:
            s = json.loads(Path(p).read_text())
            var = np.array(s["gamma"]["var"], dtype=float)
            rows.append({"summary": str(p), "n_particles": s["n_particles"],
                         "mcse_gamma": [mcse(var[:, a], s["n_particles"]) for a in range(var.shape[1])]})
        result["mcse"] = sorted(rows, key=lambda r: r["n_particles"])
    if args.summary_a or args.summary_u:
        if not (args.summary_a and args.summary_u):
            raise ValueError("PAE needs both --summary-a and --summary-u")
        sa = json.loads(Path(args.summary_a).read_text())
        su = json.loads(Path(args.summary_u).read_text())
        med = lambda s, name: np.array([np.nan if x is None else x for x in s[name]["median"]], dtype=float)
        r_a, r_u = med(sa, "R"), med(su, "R")
        ok = np.isfinite(r_a) & np.isfinite(r_u)
        result["pae"] = {
            "R": pae(r_a[ok], r_u[ok]),
            "latent_total": pae(med(sa, "latent_total"), med(su, "latent_total")),
        }
        width = lambda s: float(np.mean(np.array(s["latent_total"]["hi99"]) - np.array(s["latent_total"]["lo99"])))
        result["ci_width_latent_total"] = {"a": width(sa), "u": width(su)}
    if not result:
        raise ValueError("nothing to compute: pass --summary-a/--summary-u or --mcse")
    Path(args.out).write_text(json.dumps(result, indent=1, sort_keys=True))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="agehawkes", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="generate synthetic latent and reported cases")
    s.add_argument("--config", required=True)
    s.add_argument("--truth-gammas", required=True, help="CSV interval,<age labels...>")
    s.add_argument("--seeds", required=True, help="CSV time,age")
    s.add_argument("--dispersion", type=float, default=0.004, help="negative binomial dispersion v")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("prepare", help="aggregate a daily case CSV and build the seed history")
    s.add_argument("--config", required=True)
    s.add_argument("--cases", required=True, help="CSV date,age_band,count")
    s.add_argument("--bands", required=True, help="JSON object mapping band label to group index")
    s.add_argument("--start-date", help="calendar date of T_0 (defaults to the config)")
    s.add_argument("--jitter", action="store_true", help="place seeds at random within their day")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_prepare)

    s = sub.add_parser("fit", help="run the particle filter")
    s.add_argument("--config", required=True)
    s.add_argument("--observed", required=True, help="CSV interval,age,count")
    s.add_argument("--seeds", help="CSV time,age (default: seeds.csv beside --observed)")
    s.add_argument("--particles", type=int, default=2000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--lag", type=int, default=4)
    s.add_argument("--discount", type=float, default=0.99)
    s.add_argument("--intensity-draws", type=int, default=200)
    s.add_argument("--r-weighting", choices=["incidence", "prevalence"], default="incidence")
    s.add_argument("--history-particles", type=int, default=30)
    s.add_argument("--rescue", action="store_true", help="on collapse, retry the interval with doubled N")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("forecast", help="predict reported cases one interval ahead")
    s.add_argument("--archive", required=True, help="particles.bin written by fit")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--draws-per-particle", type=int, default=1)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_forecast)

    s = sub.add_parser("lineage", help="count directed links between age groups")
    s.add_argument("--events", help="latent_events.csv")
    s.add_argument("--archive", help="particles.bin (uses the archived particle histories)")
    s.add_argument("--config", help="needed by method b with --events")
    s.add_argument("--method", choices=["a", "b"], default="a")
    s.add_argument("--draws", type=int, default=30)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_lineage)

    s = sub.add_parser("metrics", help="PAE between two fits, MCSE across particle counts")
    s.add_argument("--summary-a")
    s.add_argument("--summary-u")
    s.add_argument("--mcse", nargs="+", help="summary.json files from runs with different N")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_metrics)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    args.argv = argv
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except Exception as err:  # reported as one machine-readable line
        print(json.dumps({"error": type(err).__name__, "message": str(err).replace("\n", " ")}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
