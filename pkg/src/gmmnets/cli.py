"""Experiment driver.

Loads a mixture spec and an experiment config, runs one pipeline per
process invocation, and persists a deterministic artifact set
(params.json / network.json / report.json / table.csv / series.csv,
depending on the experiment kind) into the output directory.  All
randomness is seeded from the config (or the --seed override); rerunning
with the same config and seeds reproduces every CSV byte for byte.

Exit codes: 0 success, 1 verification reported failure, 2 usage/config
error, 3 internal numeric error.  Errors print a machine-readable JSON
object to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import construction, metrics, shallow
from .errors import (
    AssumptionNotVerified,
    AssumptionViolated,
    DeltaOutOfRange,
    GmmNetsError,
    NonFiniteIntermediate,
    NotPositiveDefinite,
    ParseError,
    QOutOfRange,
    SpecValidationError,
)
from .gmm import GmmSpec, load_gmm_spec
from .network import SIGMOID, Activation, check_assumptions, load_net, save_net

EXPERIMENT_KINDS = (
    "construct-deep",
    "verify-dq",
    "classify",
    "shallow-bound",
    "cosine-snn",
    "node-scaling-sweep",
    "relu-variant",
)

LOCK_NAME = ".gmmnets.lock"
BUNDLED_PREFIX = "bundled:"
BUNDLED_SPECS = ("gauss1d", "mix1d3", "twoclass2d", "synth8d")


def bundled_spec_path(name: str) -> Path:
    if name not in BUNDLED_SPECS:
        raise ParseError("spec", f"unknown bundled spec {name!r}; available: {', '.join(BUNDLED_SPECS)}")
    return Path(str(resources.files("gmmnets") / "specs" / f"{name}.json"))


def resolve_spec_path(ref: str, base: Path | None = None) -> Path:
    if ref.startswith(BUNDLED_PREFIX):
        return bundled_spec_path(ref[len(BUNDLED_PREFIX) :])
    path = Path(ref)
    if base is not None and not path.is_absolute():
        path = base / path
    if not path.exists():
        raise ParseError("spec", f"spec file not found: {path}")
    return path


def fmt_float(v) -> str:
    """17-significant-digit decimal, enough to round-trip a double."""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt_float(v) if isinstance(v, (int, float, np.floating, np.integer)) else str(v) for v in row) + "\n")


def write_json(path: Path, payload) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


class ExperimentConfig:
    """Validated experiment configuration."""

    def __init__(self, doc: dict, base: Path):
        if not isinstance(doc, dict):
            raise ParseError("config", "top level must be an object")
        kind = doc.get("kind")
        if kind not in EXPERIMENT_KINDS:
            raise ParseError("config.kind", f"must be one of {', '.join(EXPERIMENT_KINDS)}, got {kind!r}")
        self.kind = kind
        self.doc = doc
        self.base = base
        if "seed" not in doc or not isinstance(doc["seed"], int):
            raise ParseError("config.seed", "an explicit integer seed is required")
        self.seed = int(doc["seed"])
        self.samples = int(doc.get("samples", 100000))
        self.out = doc.get("out")
        self.spec_path: Path | None = None
        if self.kind not in ("shallow-bound", "cosine-snn", "node-scaling-sweep"):
            ref = doc.get("spec")
            if not isinstance(ref, str):
                raise ParseError("config.spec", "a spec path is required")
            self.spec_path = resolve_spec_path(ref, base)
        net_ref = doc.get("network")
        self.network_path: Path | None = None
        if net_ref is not None:
            path = Path(net_ref)
            if not path.is_absolute():
                path = base / path
            if not path.exists():
                raise ParseError("config.network", f"network file not found: {path}")
            self.network_path = path

    @staticmethod
    def load(path) -> "ExperimentConfig":
        path = Path(path)
        if not path.exists():
            raise ParseError("config", f"config file not found: {path}")
        with open(path, "r", encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError("config", f"invalid JSON: {exc}") from exc
        return ExperimentConfig(doc, path.parent)

    def delta(self) -> float:
        if "delta" not in self.doc:
            raise ParseError("config.delta", "missing field")
        return float(self.doc["delta"])

    def q(self) -> float:
        if "q" not in self.doc:
            raise ParseError("config.q", "missing field")
        return float(self.doc["q"])

    def class_index(self) -> int:
        return int(self.doc.get("class_index", 0))

    def profile(self):
        raw = self.doc.get("activation", {})
        kind = raw.get("kind", "sigmoid")
        if kind == "sigmoid" and raw.get("tau", -1.0) == -1.0 and raw.get("r", 0.5) == 0.5:
            return construction.default_sigmoid_profile()
        act = Activation(kind, cosine_scale=raw.get("cosine_scale"))
        return check_assumptions(act, float(raw.get("tau", -1.0)), float(raw.get("r", 0.5)))


# ----------------------------------------------------------------------
# Experiment runners: each returns (exit_code, artifacts dict name -> writer)
# ----------------------------------------------------------------------

def _overlay_series(spec: GmmSpec, class_index: int, net):
    """x, d, d_hat columns for 1-D discriminant overlay plots."""
    means = [c.mean[0] for cls in spec.classes for c in cls.components]
    spread = math.sqrt(max(c.eig_max for cls in spec.classes for c in cls.components))
    lo = min(means) - 6.0 * spread
    hi = max(means) + 6.0 * spread
    xs = np.linspace(lo, hi, 513)
    pts = xs[:, np.newaxis]
    d = spec.discriminant(class_index).value(pts)
    d_hat = net.eval(pts)[:, 0]
    return [(x, dv, hv) for x, dv, hv in zip(xs, d, d_hat)]


def run_construct(config: ExperimentConfig, out: Path, builder: str) -> int:
    spec = load_gmm_spec(config.spec_path)
    ci = config.class_index()
    delta, q = config.delta(), config.q()
    params = construction.solve_params(spec, ci, delta, q, config.profile())
    if builder == "relu":
        net = construction.build_relu_network(spec, ci, params)
    else:
        net = construction.build_class_network(spec, ci, params)
    handle = spec.discriminant(ci)
    report = metrics.verify_dq(
        handle.log_value,
        net.scalar_fn(),
        spec.class_sampler(ci),
        params.tstar,
        delta,
        config.samples,
        config.seed,
        q=q,
    )
    write_json(out / "params.json", params.to_dict())
    save_net(net, out / "network.json")
    write_json(out / "report.json", report.to_dict())
    counts = [len(spec.classes[ci].components), net.node_count] + net.hidden_widths
    write_csv(
        out / "table.csv",
        ["class_index", "delta", "q", "tstar", "total_nodes", "s_fraction",
         "cond1_violations", "cond2_violations", "passed"],
        [(ci, delta, q, params.tstar, net.node_count, report.s_fraction,
          report.cond1_violations, report.cond2_violations, int(report.passed))],
    )
    if spec.n == 1:
        write_csv(out / "series.csv", ["x", "d", "d_hat"], _overlay_series(spec, ci, net))
    return 0 if (report.passed and report.s_mass_ok) else 1


def run_verify(config: ExperimentConfig, out: Path) -> int:
    spec = load_gmm_spec(config.spec_path)
    ci = config.class_index()
    delta, q = config.delta(), config.q()
    params = construction.solve_params(spec, ci, delta, q, config.profile())
    if config.network_path is not None:
        net = load_net(config.network_path)
    else:
        net = construction.build_class_network(spec, ci, params)
    handle = spec.discriminant(ci)
    report = metrics.verify_dq(
        handle.log_value,
        net.scalar_fn(),
        spec.class_sampler(ci),
        params.tstar,
        delta,
        config.samples,
        config.seed,
        q=q,
    )
    write_json(out / "report.json", report.to_dict())
    write_csv(
        out / "table.csv",
        ["class_index", "delta", "q", "tstar", "s_fraction", "s_fraction_se",
         "max_rel_error_on_s", "cond1_violations", "cond2_violations", "passed"],
        [(ci, delta, q, params.tstar, report.s_fraction, report.s_fraction_se,
          report.max_rel_error_on_s, report.cond1_violations, report.cond2_violations,
          int(report.passed))],
    )
    return 0 if (report.passed and report.s_mass_ok) else 1


def run_classify(config: ExperimentConfig, out: Path) -> int:
    spec = load_gmm_spec(config.spec_path)
    delta, q = config.delta(), config.q()
    profile = config.profile()
    nets = []
    for i in range(spec.num_classes):
        params = construction.solve_params(spec, i, delta, q, profile)
        nets.append(construction.build_class_network(spec, i, params))
    approx = metrics.empirical_error(metrics.net_classifier(nets), spec, config.samples, config.seed)
    bayes = metrics.empirical_error(spec.bayes_classify, spec, config.samples, config.seed)
    gap = float(np.max(np.abs(approx.rates - bayes.rates)))
    write_json(
        out / "report.json",
        {"approx": approx.to_dict(), "bayes": bayes.to_dict(), "max_rate_gap": gap},
    )
    rows = []
    for i in range(spec.num_classes):
        for j in range(spec.num_classes):
            rows.append(
                (i, j, int(approx.confusion[i, j]), approx.rates[i, j], approx.rate_ses[i, j],
                 bayes.rates[i, j], bayes.rate_ses[i, j])
            )
    write_csv(
        out / "table.csv",
        ["true_class", "declared_class", "count", "rate", "rate_se", "bayes_rate", "bayes_rate_se"],
        rows,
    )
    return 0


def run_shallow_bound(config: ExperimentConfig, out: Path) -> int:
    doc = config.doc.get("shallow")
    if not isinstance(doc, dict):
        raise ParseError("config.shallow", "missing sweep object")
    ns = [int(v) for v in doc.get("n", [])]
    n1s = [int(v) for v in doc.get("n1", [])]
    if not ns or not n1s:
        raise ParseError("config.shallow", "need non-empty n and n1 lists")
    s_x = float(doc.get("s_x", 1.0))
    s_f = float(doc.get("s_f", 1.0))
    coeff_norm = float(doc.get("coeff_norm", 1.0))
    epsilon = float(doc.get("epsilon", 0.1))
    rows = []
    reports = []
    for n in ns:
        for n1 in n1s:
            problem = shallow.ShallowProblem(n=n, s_x=s_x, s_f=s_f, n1=n1, coeff_norm=coeff_norm)
            rep = shallow.eval_lower_bound(problem, epsilon=epsilon)
            rows.append((n, n1, s_x, s_f, coeff_norm, rep.rho, rep.bound, rep.n1_min, rep.m1, rep.m2))
            reports.append({"n": n, "n1": n1, **rep.to_dict()})
    write_csv(
        out / "table.csv",
        ["n", "n1", "s_x", "s_f", "coeff_norm", "rho", "bound", "n1_min", "m1", "m2"],
        rows,
    )
    write_json(out / "report.json", {"rows": reports})
    return 0


def run_cosine_snn(config: ExperimentConfig, out: Path) -> int:
    doc = config.doc.get("shallow")
    if not isinstance(doc, dict):
        raise ParseError("config.shallow", "missing problem object")
    problem = shallow.ShallowProblem(
        n=int(doc.get("n", 6)),
        s_x=float(doc.get("s_x", 1.0)),
        s_f=float(doc.get("s_f", 1.0)),
        n1=int(doc.get("n1", 200)),
    )
    num_seeds = int(doc.get("seeds", 20))
    sampler = shallow.gaussian_sampler(problem.n, problem.s_x)
    seeds = np.random.SeedSequence(config.seed).spawn(num_seeds)
    rows = []
    errors = []
    net = None
    for idx, child in enumerate(seeds):
        rng_seed = int(child.generate_state(1)[0])
        net = shallow.build_cosine_snn(problem, rng_seed)
        rep = shallow.estimate_l2_error(
            net.scalar_fn(), lambda x: shallow.mu_c(problem, x), sampler,
            config.samples, rng_seed + 1,
        )
        rows.append((idx, rng_seed, rep.mean_sq_diff, rep.se_diff))
        errors.append(rep.mean_sq_diff)
    errors = np.array(errors)
    avg = float(np.mean(errors))
    se = float(np.std(errors, ddof=1) / math.sqrt(len(errors)))
    bound = problem.alpha ** (problem.n / 2.0) / problem.n1
    write_csv(out / "table.csv", ["seed_index", "seed", "mean_sq_error", "se"], rows)
    write_json(
        out / "report.json",
        {"problem": {"n": problem.n, "s_x": problem.s_x, "s_f": problem.s_f, "n1": problem.n1},
         "average_error": avg, "average_se": se, "expected_error_bound": bound,
         "within_bound": bool(avg <= bound + 3.0 * se)},
    )
    if net is not None:
        save_net(net, out / "network.json")
    return 0 if avg <= bound + 3.0 * se else 1


def run_node_scaling(config: ExperimentConfig, out: Path) -> int:
    doc = config.doc.get("sweep", {})
    ns = [int(v) for v in doc.get("n", [2, 4, 8, 16, 32])]
    delta, q = config.delta(), config.q()
    rows = construction.node_scaling_sweep(ns, delta, q, config.profile())
    slope, intercept, r2 = construction.affine_fit_r2(
        [row["n"] for row in rows], [row["total"] for row in rows]
    )
    write_csv(
        out / "series.csv",
        ["n", "first_layer", "second_layer", "total"],
        [(row["n"], row["first_layer"], row["second_layer"], row["total"]) for row in rows],
    )
    write_csv(out / "table.csv", ["slope", "intercept", "r_squared"], [(slope, intercept, r2)])
    write_json(
        out / "report.json",
        {"rows": rows, "fit": {"slope": slope, "intercept": intercept, "r_squared": r2}},
    )
    return 0


RUNNERS = {
    "construct-deep": lambda cfg, out: run_construct(cfg, out, "basic"),
    "relu-variant": lambda cfg, out: run_construct(cfg, out, "relu"),
    "verify-dq": run_verify,
    "classify": run_classify,
    "shallow-bound": run_shallow_bound,
    "cosine-snn": run_cosine_snn,
    "node-scaling-sweep": run_node_scaling,
}

ARTIFACT_NAMES = ("params.json", "network.json", "report.json", "table.csv", "series.csv")


def run_experiment(config: ExperimentConfig, out_dir) -> int:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lock = out / LOCK_NAME
    try:
        lock_fh = open(lock, "x")
    except FileExistsError:
        raise ParseError("out", f"output directory is locked by {lock}")
    written = []
    try:
        lock_fh.close()
        return RUNNERS[config.kind](config, out)
    except BaseException:
        for name in ARTIFACT_NAMES:
            target = out / name
            if target.exists():
                target.unlink()
        raise
    finally:
        lock.unlink(missing_ok=True)


# ----------------------------------------------------------------------
# describe
# ----------------------------------------------------------------------

def describe(path_or_ref: str, stream=None) -> int:
    stream = stream or sys.stdout
    if path_or_ref.startswith(BUNDLED_PREFIX) or path_or_ref.endswith(".json") is False:
        pass
    path = resolve_spec_path(path_or_ref) if path_or_ref.startswith(BUNDLED_PREFIX) else Path(path_or_ref)
    if not path.exists():
        raise ParseError("describe", f"file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError("describe", f"invalid JSON: {exc}") from exc
    if isinstance(doc, dict) and "kind" in doc:
        config = ExperimentConfig(doc, path.parent)
        print(f"experiment: {config.kind}", file=stream)
        print(f"seed: {config.seed}  samples: {config.samples}", file=stream)
        if config.spec_path is not None:
            spec = load_gmm_spec(config.spec_path)
            _describe_spec(spec, stream)
            if "delta" in config.doc and "q" in config.doc:
                delta, q = config.delta(), config.q()
                profile = config.profile()
                for i in range(spec.num_classes):
                    params = construction.solve_params(spec, i, delta, q, profile)
                    print(
                        f"class {i}: t*={params.tstar:.6g} lam={params.lam:.6g} "
                        f"J={params.J} V={params.V:.4g}",
                        file=stream,
                    )
                    for plan in params.plans:
                        if plan.trivial:
                            print(f"  component {plan.index}: trivial", file=stream)
                        else:
                            print(
                                f"  component {plan.index}: R={plan.R:.4f} a={plan.a:.4g} "
                                f"T={plan.T:.4f} K={plan.K} step={plan.step:.6g}",
                                file=stream,
                            )
        return 0
    spec = load_gmm_spec(path)
    _describe_spec(spec, stream)
    return 0


def _describe_spec(spec: GmmSpec, stream) -> None:
    lo, hi = spec.eig_range
    print(
        f"mixture: n={spec.n} classes={spec.num_classes} components={spec.num_components} "
        f"eigenvalues in [{lo:.6g}, {hi:.6g}]",
        file=stream,
    )
    for i, cls in enumerate(spec.classes):
        print(f"class {i}: prior={cls.prior} components={cls.size} V={cls.variance_bound:.6g}", file=stream)


# ----------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gmmnets", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in EXPERIMENT_KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment from a config file")
        p.add_argument("--config", required=True, help="experiment config (JSON)")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--seed", type=int, help="seed override")
        p.add_argument("--samples", type=int, help="Monte Carlo sample count override")
    d = sub.add_parser("describe", help="summarize a spec or config without running")
    d.add_argument("path", help="spec file, config file, or bundled:<name>")
    return parser


def _error_payload(exc: Exception) -> dict:
    payload = {"type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, (SpecValidationError, ParseError)):
        payload["path"] = getattr(exc, "path", getattr(exc, "location", None))
    return {"error": payload}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        if args.command == "describe":
            return describe(args.path)
        config = ExperimentConfig.load(args.config)
        if config.kind != args.command:
            raise ParseError("config.kind", f"config is for {config.kind!r}, not {args.command!r}")
        if args.seed is not None:
            config.seed = args.seed
        if args.samples is not None:
            config.samples = args.samples
        out_dir = args.out or config.out or f"out-{config.kind}"
        return run_experiment(config, out_dir)
    except (SpecValidationError, ParseError, DeltaOutOfRange, QOutOfRange, FileNotFoundError) as exc:
        print(json.dumps(_error_payload(exc)), file=sys.stderr)
        return 2
    except (NotPositiveDefinite, NonFiniteIntermediate, AssumptionViolated,
            AssumptionNotVerified, GmmNetsError, FloatingPointError) as exc:
        print(json.dumps(_error_payload(exc)), file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
