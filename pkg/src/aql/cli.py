"""Command-line front end for desk-scale loading experiments.

Every command resolves its configuration from flags plus an optional JSON
config file (flags win), derives all randomness from one master seed through
named substreams, and writes a manifest JSON next to its outputs so each
CSV/JSON row is attributable to exactly one invocation.  CSV output is
RFC 4180 (CRLF rows) behind one leading comment line that names the schema
version and the manifest hash.  With identical flags and seed the CSV bytes
are identical run to run; cell timings are opt-in (--timing) because wall
clock is the one column that cannot be reproducible.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import click

from . import __version__
from ._seeding import substream
from .aqer import AqerConfig, run_aqer
from .baselines import aqce_run, gate_count_table, hec_build, hec_train, mps_loader
from .checks import CHECK_NAMES, run_checks
from .datasets import (
    IqpSpec,
    SpinHamiltonianSpec,
    ghz,
    ground_state,
    iqp_state,
    magnetization,
    random_circuit_state,
)
from .entanglement import bound_f1, bound_f2, entanglement_total
from .io import read_state, write_circuit, write_state
from .iqp import iqp_approx_load, iqp_exact_load, iqp_shot_recover
from .noisy import noisy_load_eval
from .statevector import StateVector, apply_circuit, fidelity

CSV_SCHEMA = "v1"


# ---------------------------------------------------------------------------
# manifest and formatting plumbing


def _fmt(x) -> str:
    """CSV cell: 12 significant digits for floats, empty for missing."""
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _canonical_hash(doc: dict) -> str:
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _command_line(name: str, config: dict) -> str:
    parts = [f"aql {name}"]
    for k in sorted(config):
        v = config[k]
        if v is None:
            continue
        flag = "--" + k.replace("_", "-")
        if isinstance(v, (list, tuple)):
            v = ",".join(_fmt(x) for x in v)
        parts.append(f"{flag}={v}")
    return " ".join(parts)


class Run:
    """One invocation: resolved config, input hashes, outputs, timing."""

    def __init__(self, name: str, ctx: click.Context, out_dir: str):
        self.name = name
        self.t0 = time.perf_counter()
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.inputs: Dict[str, str] = {}
        self.outputs: List[str] = []
        config = {}
        config_path = ctx.params.get("config")
        file_values = {}
        if config_path:
            with open(config_path) as f:
                file_values = json.load(f)
            if not isinstance(file_values, dict):
                raise click.UsageError("config file must hold a JSON object")
            self.add_input(config_path)
        for key, value in ctx.params.items():
            if key == "config":
                continue
            source = ctx.get_parameter_source(key)
            fk = key.replace("-", "_")
            if (source == click.core.ParameterSource.DEFAULT
                    and fk in {k.replace("-", "_") for k in file_values}):
                for k, v in file_values.items():
                    if k.replace("-", "_") == fk:
                        value = v
            config[key] = list(value) if isinstance(value, tuple) else value
        self.config = config
        self.seed = config.get("seed", 0)

    def add_input(self, path) -> Path:
        p = Path(path)
        self.inputs[p.name] = _sha256_file(p)
        return p

    @property
    def hash(self) -> str:
        # hash the experiment, not its location: output paths are excluded
        # and input paths reduce to basenames (content is pinned by sha256)
        cfg = {}
        for k, v in self.config.items():
            if k in ("out_dir", "out", "name"):
                continue
            if k in ("target", "targets", "spec_file") and v:
                v = ([Path(x).name for x in v] if isinstance(v, list)
                     else Path(v).name)
            cfg[k] = v
        core = {
            "schema": f"aql-manifest-{CSV_SCHEMA}",
            "command": self.name,
            "config": cfg,
            "seed": self.seed,
            "version": __version__,
            "inputs": self.inputs,
        }
        return _canonical_hash(core)

    def write_json(self, stem: str, doc: dict) -> Path:
        path = self.out_dir / f"{stem}.json"
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        self.outputs.append(path.name)
        return path

    def write_csv(self, filename: str, header: Sequence[str],
                  rows: Sequence[Sequence]) -> Path:
        path = self.out_dir / filename
        with open(path, "w", newline="") as f:
            f.write(f"# aql-csv {CSV_SCHEMA} {self.name} manifest={self.hash}\r\n")
            w = csv.writer(f)  # csv defaults to CRLF row endings
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(x) for x in row])
        self.outputs.append(path.name)
        return path

    def finish(self, report: Optional[dict] = None) -> Path:
        manifest = {
            "schema": f"aql-manifest-{CSV_SCHEMA}",
            "command": _command_line(self.name, self.config),
            "config": self.config,
            "seed": self.seed,
            "version": __version__,
            "inputs": self.inputs,
            "manifest_hash": self.hash,
            "outputs": sorted(self.outputs),
            "wall_ms": int((time.perf_counter() - self.t0) * 1000),
        }
        if report is not None:
            manifest["report"] = report
        stem = (self.config.get("name")
                or (Path(self.config["out"]).stem if self.config.get("out")
                    else self.name))
        path = self.out_dir / f"{stem}.manifest.json"
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return path


def _ints(text: str, flag: str) -> Tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in str(text).split(","))
    except ValueError:
        raise click.UsageError(f"{flag} expects comma-separated integers")


def _floats(text: str, flag: str) -> Tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in str(text).split(","))
    except ValueError:
        raise click.UsageError(f"{flag} expects comma-separated numbers")


def _load_target(run: Run, path: str) -> StateVector:
    return read_state(run.add_input(path))


_CONFIG_OPT = click.option(
    "--config", type=click.Path(exists=True, dir_okay=False), default=None,
    help="JSON file with default values; explicit flags win.")
_OUT_DIR_OPT = click.option(
    "--out-dir", type=click.Path(file_okay=False), default=".",
    help="Directory receiving outputs and the manifest.")


@click.group()
@click.version_option(__version__, prog_name="aql")
def main():
    """Approximate state loading: datasets, loaders, bounds, sweeps."""


# ---------------------------------------------------------------------------
# gen-dataset


@main.command("gen-dataset")
@click.option("--kind", type=click.Choice(["tfim", "ghz", "srqc"]), required=True)
@click.option("--num-qubits", "-N", "n", type=int, required=True)
@click.option("--coupling", "-J", "j", type=float, default=1.0,
              help="tfim: ZZ coupling strength.")
@click.option("--field", "-g", "g", type=float, default=1.0,
              help="tfim: transverse field strength.")
@click.option("--gates", "-W", "w", type=int, default=40,
              help="srqc: number of two-qubit gates.")
@click.option("--seed", type=int, default=0)
@click.option("--name", default=None, help="Output stem (default derived).")
@_OUT_DIR_OPT
@_CONFIG_OPT
@click.pass_context
def gen_dataset(ctx, kind, n, j, g, w, seed, name, out_dir, config):
    """Write one target state as a QSV1 file plus its manifest."""
    run = Run("gen-dataset", ctx, out_dir)
    kind = run.config["kind"]
    n, seed = int(run.config["n"]), int(run.config["seed"])
    report: Dict[str, object] = {"kind": kind, "num_qubits": n}
    if kind == "tfim":
        j, g = float(run.config["j"]), float(run.config["g"])
        state, energy = ground_state(SpinHamiltonianSpec.tfim_chain(n, j, g))
        report["energy"] = energy
        stem = f"tfim_N{n}_J{_fmt(j)}_g{_fmt(g)}"
    elif kind == "ghz":
        state = ghz(n)
        stem = f"ghz_N{n}"
    else:
        w = int(run.config["w"])
        state = random_circuit_state(n, w, seed)
        stem = f"srqc_N{n}_W{w}_seed{seed}"
    stem = run.config["name"] or stem
    report["S"] = entanglement_total(state.amplitudes, n)
    path = run.out_dir / f"{stem}.qsv"
    write_state(path, state)
    run.outputs.append(path.name)
    report["state_sha256"] = _sha256_file(path)
    run.config["name"] = stem
    manifest = run.finish(report)
    click.echo(f"wrote {path.name} (S={_fmt(report['S'])}) manifest={manifest.name}")


# ---------------------------------------------------------------------------
# run


@main.command("run")
@click.option("--method", type=click.Choice(["aqer", "mps", "hec", "aqce"]),
              required=True)
@click.option("--target", type=click.Path(exists=True, dir_okay=False),
              required=True, help="QSV1 state file to load.")
@click.option("--blocks", "-T", "t", type=int, default=0,
              help="aqer: entangler block count T.")
@click.option("--train-iters", "t3", type=int, default=2000,
              help="aqer/hec: gradient-descent iterations.")
@click.option("--lr", type=float, default=1e-2, help="aqer: Adam step size.")
@click.option("--shots", type=int, default=None,
              help="aqer: per-estimate measurement shots (omit for exact).")
@click.option("--layers", type=int, default=1, help="mps/hec: layer count.")
@click.option("--units", type=int, default=5, help="aqce: two-qubit unit count.")
@click.option("--sweeps", type=int, default=200,
              help="aqce: update sweeps per expansion.")
@click.option("--seed", type=int, default=0)
@click.option("--name", default=None, help="Output stem (default derived).")
@_OUT_DIR_OPT
@_CONFIG_OPT
@click.pass_context
def cmd_run(ctx, method, target, t, t3, lr, shots, layers, units, sweeps, seed,
            name, out_dir, config):
    """Load one target with one method; write result JSON and circuit."""
    run = Run("run", ctx, out_dir)
    method = run.config["method"]
    seed = int(run.config["seed"])
    state = _load_target(run, run.config["target"])
    n = state.num_qubits
    stem = run.config["name"] or f"{method}_{Path(run.config['target']).stem}_seed{seed}"
    run.config["name"] = stem
    result: Dict[str, object] = {
        "method": method, "target": Path(run.config["target"]).name,
        "num_qubits": n, "seed": seed,
    }
    if method == "aqer":
        cfg = AqerConfig(T=int(run.config["t"]), T3=int(run.config["t3"]),
                         lr=float(run.config["lr"]),
                         shots=run.config["shots"], seed=seed)
        res = run_aqer(state, cfg)
        circ, theta = res.circuit, res.theta_star
        result.update(
            T=cfg.T, G=res.G, shots=cfg.shots,
            s_initial=res.s_initial,
            s_final=float(res.s_trace[-1]) if res.s_trace else res.s_initial,
            s_trace=[float(x) for x in res.s_trace],
            infidelity_initial=res.infidelity_initial,
            infidelity_final=res.infidelity_final,
            theta=[float(x) for x in theta],
        )
    elif method == "mps":
        circ, infid, gates = mps_loader(state, int(run.config["layers"]))
        theta = None
        result.update(layers=int(run.config["layers"]), G=gates,
                      infidelity_final=infid)
    elif method == "hec":
        layers = int(run.config["layers"])
        circ = hec_build(n, layers)
        theta, loss = hec_train(state, circ, seed=seed)
        result.update(layers=layers, G=gate_count_table("hec", n, layers),
                      infidelity_final=loss, theta=[float(x) for x in theta])
    else:
        st, circ, infid, gates = aqce_run(
            state, int(run.config["units"]),
            sweeps_per_expansion=int(run.config["sweeps"]))
        theta = None
        result.update(units=int(run.config["units"]), G=gates,
                      infidelity_initial=1.0 - st.fidelity_trace[0],
                      infidelity_final=infid,
                      updates=len(st.fidelity_trace))
    circ_path = run.out_dir / f"{stem}_circuit.json"
    write_circuit(circ_path, circ)
    run.outputs.append(circ_path.name)
    result["circuit_file"] = circ_path.name
    run.write_json(stem, result)
    run.finish({k: v for k, v in result.items()
                if not isinstance(v, list)})
    click.echo(f"{method}: infidelity={_fmt(result['infidelity_final'])} "
               f"G={result['G']}")


# ---------------------------------------------------------------------------
# sweep


def _native_grid(method: str, n: int, t_grid, g_grid) -> Tuple[int, ...]:
    """Unit counts to run: T blocks (aqer), layers (mps/hec), units (aqce).

    Budget grids convert conservatively via the complex-synthesis counts:
    mps 3(N-1) per layer, hec ceil(N/2) per layer, aqce 3 per unit.
    """
    if (t_grid is None) == (g_grid is None):
        raise click.UsageError("pass exactly one of --T-grid / --G-grid")
    if t_grid is not None:
        return _ints(t_grid, "--T-grid")
    budgets = _ints(g_grid, "--G-grid")
    out = []
    for budget in budgets:
        if method == "aqer":
            k = budget
        elif method == "mps":
            k = budget // (3 * (n - 1))
        elif method == "hec":
            k = max(kk for kk in range(0, 2 * budget + 2)
                    if math.ceil(n * kk / 2) <= budget)
        else:
            k = budget // 3
        if k < 1:
            raise click.UsageError(f"budget G={budget} is below one {method} unit")
        out.append(k)
    return tuple(out)


def _sweep_cell(method: str, state: StateVector, count: int, shots,
                seed: int, t3: int, lr: float, sweeps: int):
    """One sweep cell -> (G, S_final, infid_initial, infid_final)."""
    n = state.num_qubits
    if method == "aqer":
        cfg = AqerConfig(T=count, T3=t3, lr=lr, shots=shots, seed=seed)
        res = run_aqer(state, cfg)
        s_final = float(res.s_trace[-1]) if res.s_trace else res.s_initial
        return res.G, s_final, res.infidelity_initial, res.infidelity_final
    if method == "mps":
        _, infid, gates = mps_loader(state, count)
        return gates, None, None, infid
    if method == "hec":
        circ = hec_build(n, count)
        _, loss = hec_train(state, circ, seed=seed)
        return gate_count_table("hec", n, count), None, None, loss
    st, _, infid, gates = aqce_run(state, count, sweeps_per_expansion=sweeps)
    return gates, None, 1.0 - st.fidelity_trace[0], infid


@main.command("sweep")
@click.option("--method", type=click.Choice(["aqer", "mps", "hec", "aqce"]),
              required=True)
@click.option("--targets", type=click.Path(exists=True, dir_okay=False),
              multiple=True, required=True)
@click.option("--T-grid", "t_grid", default=None,
              help="Native unit counts: blocks/layers/units.")
@click.option("--G-grid", "g_grid", default=None,
              help="Two-qubit gate budgets, converted per method.")
@click.option("--shots-grid", default=None,
              help="aqer: comma list; 0 means exact estimation.")
@click.option("--seeds", default="0", help="Comma-separated master seeds.")
@click.option("--train-iters", "t3", type=int, default=2000)
@click.option("--lr", type=float, default=1e-2)
@click.option("--sweeps", type=int, default=200,
              help="aqce: update sweeps per expansion.")
@click.option("--out", default="sweep.csv", help="CSV filename.")
@click.option("--timing/--no-timing", default=False,
              help="Fill wall_ms (breaks byte-reproducibility).")
@_OUT_DIR_OPT
@_CONFIG_OPT
@click.pass_context
def cmd_sweep(ctx, method, targets, t_grid, g_grid, shots_grid, seeds, t3, lr,
              sweeps, out, timing, out_dir, config):
    """Grid of loader runs; one CSV row per (target, count, shots, seed)."""
    run = Run("sweep", ctx, out_dir)
    method = run.config["method"]
    shots_list: Tuple[Optional[int], ...] = (None,)
    if run.config["shots_grid"] is not None:
        if method != "aqer":
            raise click.UsageError("--shots-grid applies to aqer only")
        shots_list = tuple(s if s > 0 else None
                           for s in _ints(run.config["shots_grid"], "--shots-grid"))
    seed_list = _ints(run.config["seeds"], "--seeds")
    rows = []
    for target_path in run.config["targets"]:
        state = _load_target(run, target_path)
        dataset = Path(target_path).stem
        counts = _native_grid(method, state.num_qubits,
                              run.config["t_grid"], run.config["g_grid"])
        for count in counts:
            for shots in shots_list:
                for seed in seed_list:
                    cell0 = time.perf_counter()
                    gates, s_final, infid0, infid1 = _sweep_cell(
                        method, state, count, shots, seed,
                        int(run.config["t3"]), float(run.config["lr"]),
                        int(run.config["sweeps"]))
                    wall = (int((time.perf_counter() - cell0) * 1000)
                            if run.config["timing"] else None)
                    rows.append((dataset, method, count, gates, shots, seed,
                                 s_final, infid0, infid1, wall))
    rows.sort(key=lambda r: (r[0], r[1], r[2], -1 if r[4] is None else r[4], r[5]))
    path = run.write_csv(run.config["out"],
                         ("dataset", "method", "T", "G", "shots", "seed",
                          "S_final", "infidelity_initial", "infidelity_final",
                          "wall_ms"),
                         rows)
    run.finish({"rows": len(rows)})
    click.echo(f"wrote {path.name} ({len(rows)} rows)")


# ---------------------------------------------------------------------------
# small delegation commands


@main.command("bounds-table")
@click.option("--S-grid", "s_grid", required=True,
              help="Comma-separated total-entropy values.")
@click.option("--num-qubits", "-N", "n", type=int, required=True)
@click.option("--out", default="bounds.csv")
@_OUT_DIR_OPT
@_CONFIG_OPT
@click.pass_context
def cmd_bounds_table(ctx, s_grid, n, out, out_dir, config):
    """Infidelity envelope f1/f2 at each entropy value."""
    run = Run("bounds-table", ctx, out_dir)
    n = int(run.config["n"])
    values = sorted(_floats(run.config["s_grid"], "--S-grid"))
    rows = [(s, bound_f1(s, n), bound_f2(s)) for s in values]
    path = run.write_csv(run.config["out"], ("S", "f1", "f2"), rows)
    run.finish({"rows": len(rows)})
    click.echo(f"wrote {path.name} ({len(rows)} rows)")


@main.command("phase")
@click.option("--num-qubits", "-N", "n", type=int, required=True)
@click.option("--gJ-grid", "gj_grid", required=True,
              help="Transverse-field ratios g/J.")
@click.option("--T-grid", "t_grid", required=True, help="Loader block counts.")
@click.option("--train-iters", "t3", type=int, default=2000)
@click.option("--seed", type=int, default=0)
@click.option("--out", default="phase.csv")
@_OUT_DIR_OPT
@_CONFIG_OPT
@click.pass_context
def cmd_phase(ctx, n, gj_grid, t_grid, t3, seed, out, out_dir, config):
    """Magnetization of loaded TFIM ground states across the phase diagram."""
    run = Run("phase", ctx, out_dir)
    n, seed = int(run.config["n"]), int(run.config["seed"])
    ratios = sorted(_floats(run.config["gj_grid"], "--gJ-grid"))
    counts = _ints(run.config["t_grid"], "--T-grid")
    rows = []
    for ratio in ratios:
        state, _energy = ground_state(SpinHamiltonianSpec.tfim_chain(n, 1.0, ratio))
        m_exact = magnetization(state)
        for count in counts:
            cfg = AqerConfig(T=count, T3=int(run.config["t3"]), seed=seed)
            res = run_aqer(state, cfg)
            loaded = apply_circuit(StateVector.zero(n), res.circuit, res.theta_star)
            rows.append((n, ratio, count, m_exact, magnetization(loaded),
                         res.infidelity_final))
    rows.sort(key=lambda r: (r[1], r[2]))
    path = run.write_csv(run.config["out"],
                         ("N", "gJ", "T", "m_exact", "m_loaded", "infidelity"),
                         rows)
    run.finish({"rows": len(rows)})
    click.echo(f"wrote {path.name} ({len(rows)} rows)")


@main.command("noise-sweep")
@click.option("--target", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--T-grid", "t_grid", required=True, help="Loader block counts.")
@click.option("--p1", type=float, default=1e-3,
              help="Depolarizing rate after single-qubit gates.")
@click.option("--p2", type=float, default=1e-2,
              help="Depolarizing rate after two-qubit gates.")
@click.option("--placement", type=click.Choice(["per-gate", "per-layer"]),
              default="per-gate")
@click.option("--train-iters", "t3", type=int, default=2000)
@click.option("--seed", type=int, default=0)
@click.option("--out", default="noise.csv")
@_OUT_DIR_OPT
@_CONFIG_OPT
@click.pass_context
def cmd_noise_sweep(ctx, target, t_grid, p1, p2, placement, t3, seed, out,
                    out_dir, config):
    """Noisy loading infidelity against circuit size at fixed noise rates."""
    run = Run("noise-sweep", ctx, out_dir)
    state = _load_target(run, run.config["target"])
    p1, p2 = float(run.config["p1"]), float(run.config["p2"])
    rows = []
    for count in _ints(run.config["t_grid"], "--T-grid"):
        cfg = AqerConfig(T=count, T3=int(run.config["t3"]),
                         seed=int(run.config["seed"]))
        res = run_aqer(state, cfg)
        infid = noisy_load_eval(state, res.circuit, res.theta_star, p1, p2,
                                placement=run.config["placement"])
        rows.append((count, p1, p2, infid))
    rows.sort(key=lambda r: r[0])
    path = run.write_csv(run.config["out"], ("T", "p1", "p2", "infidelity"),
                         rows)
    run.finish({"rows": len(rows)})
    click.echo(f"wrote {path.name} ({len(rows)} rows)")


# ---------------------------------------------------------------------------
# structured loading


@main.command("iqp")
@click.option("--mode", type=click.Choice(["exact", "approx", "shot"]),
              required=True)
@click.option("--spec-file", type=click.Path(exists=True, dir_okay=False),
              required=True,
              help='JSON {"num_qubits": N, "edges": [[i,j],...], "angles": [...]}')
@click.option("--grid-k", "-K", "k", type=int, default=None,
              help="exact: angle-grid resolution K.")
@click.option("--degree-bound", type=int, default=None,
              help="approx/shot: maximum interaction degree D.")
@click.option("--eps", type=float, default=None, help="approx: target S bound.")
@click.option("--delta", type=float, default=0.05,
              help="approx/shot: failure probability budget.")
@click.option("--seed", type=int, default=0)
@click.option("--name", default=None, help="Output stem (default derived).")
@_OUT_DIR_OPT
@_CONFIG_OPT
@click.pass_context
def cmd_iqp(ctx, mode, spec_file, k, degree_bound, eps, delta, seed, name,
            out_dir, config):
    """Recover a diagonal-interaction circuit from its state or oracle."""
    run = Run("iqp", ctx, out_dir)
    mode = run.config["mode"]
    seed = int(run.config["seed"])
    with open(run.add_input(run.config["spec_file"])) as f:
        doc = json.load(f)
    spec = IqpSpec(int(doc["num_qubits"]),
                   tuple(tuple(int(q) for q in e) for e in doc["edges"]),
                   tuple(float(a) for a in doc["angles"]))
    target = iqp_state(spec)
    n = spec.num_qubits
    shots_used = 0
    e_recovered = None
    if mode == "exact":
        if run.config["k"] is None:
            raise click.UsageError("exact mode needs --grid-k")
        circ, iterations = iqp_exact_load(target, int(run.config["k"]))
        e_recovered = iterations
    elif mode == "approx":
        if run.config["degree_bound"] is None or run.config["eps"] is None:
            raise click.UsageError("approx mode needs --degree-bound and --eps")
        circ, _s = iqp_approx_load(target, int(run.config["degree_bound"]),
                                   float(run.config["eps"]),
                                   float(run.config["delta"]))
        iterations = sum(1 for op in circ.ops if op.kind == "RZZ")
    else:
        if run.config["degree_bound"] is None:
            raise click.UsageError("shot mode needs --degree-bound")
        if any(abs(a - math.pi / 4) > 1e-9 for a in spec.angles):
            raise click.UsageError(
                "shot mode recovers the fixed-angle family: every edge "
                "angle must be pi/4")
        edges, circ, shots_used = iqp_shot_recover(
            target, int(run.config["degree_bound"]),
            float(run.config["delta"]), substream(seed, "shots"))
        iterations = len(edges)
        e_recovered = len(edges)
    loaded = apply_circuit(StateVector.zero(n), circ)
    residual = apply_circuit(target, circ, adjoint=True)
    report = {
        "mode": mode,
        "N": n,
        "E_true": len(spec.edges),
        "E_recovered": e_recovered,
        "iterations": iterations,
        "shots_used": shots_used,
        "S_final": entanglement_total(residual.amplitudes, n),
        "infidelity": 1.0 - fidelity(loaded, target),
    }
    stem = run.config["name"] or f"iqp_{mode}_N{n}"
    run.config["name"] = stem
    circ_path = run.out_dir / f"{stem}_circuit.json"
    write_circuit(circ_path, circ)
    run.outputs.append(circ_path.name)
    run.write_json(stem, report)
    run.finish(report)
    click.echo(f"iqp {mode}: infidelity={_fmt(report['infidelity'])} "
               f"iterations={iterations}")


# ---------------------------------------------------------------------------
# verify


@main.command("verify")
@click.option("--full", is_flag=True,
              help="Use the stated trial counts instead of the quick subset.")
@click.option("--only", default=None,
              help="Comma-separated check names to run.")
@click.option("--seed", type=int, default=0)
@click.option("--list", "list_names", is_flag=True, help="List check names.")
def cmd_verify(full, only, seed, list_names):
    """Run the invariant battery; exit nonzero if any check fails."""
    if list_names:
        for name in CHECK_NAMES:
            click.echo(name)
        return
    names = only.split(",") if only else None

    def report(res):
        mark = "PASS" if res.passed else "FAIL"
        click.echo(f"{mark} {res.name:24s} {res.seconds:7.2f}s  {res.detail}")

    try:
        results = run_checks(seed=seed, full=full, names=names, report=report)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    failed = [r for r in results if not r.passed]
    click.echo(f"{len(results) - len(failed)}/{len(results)} checks passed")
    if failed:
        raise SystemExit(1)


if __name__ == "__main__":
    main()
