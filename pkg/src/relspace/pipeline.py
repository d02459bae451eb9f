"""Iterative estimation pipeline and batch experiment runner.

One run alternates word segmentation and concept learning: segmentation
proposes candidate corpus segmentations, the concept learner is run on
each, the candidate whose slot words carry the most information about
the learned concepts is kept, and a language model built from it guides
the next segmentation round.  The final round re-decodes the corpus with
the last language model and learns once more.  Ablations switch off the
information-based selection, the class grouping in the language model,
or both; a ceiling variant learns straight from the true words.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import time
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .classlm import ClassTrigramLM, build_lm, decode
from .distributions import DistanceModel, Hyperparams
from .evaluate import (
    ari,
    location_word_par,
    object_word_par,
    reference_accuracy,
)
from .learner import (
    LearnData,
    PointEstimate,
    build_learn_data,
    mutual_information,
    object_information,
    run_chain,
    summarize,
)
from .phonemes import default_inventory
from .segment import CorpusList, sample_corpus_lists
from .simulate import (
    ChannelConfig,
    DEFAULT_CONCEPTS,
    DEFAULT_OBJECT_WORDS,
    simulate_dataset,
)

METHODS = ("truewords", "baseline", "mi", "clm", "clm_mi")

CSV_COLUMNS = (
    "method",
    "J",
    "seed",
    "ari",
    "par",
    "ref_accuracy",
    "i_r",
    "wall_ms",
    "par_obj",
    "i_o",
    "n_concepts",
    "distance_mean",
    "status",
)


@dataclass
class RunConfig:
    """Everything one pipeline run depends on."""

    method: str = "clm_mi"
    object_words: bool = False  # data contains object words
    learn_objects: bool = False  # learner models the object word slot
    n_objects: int = 3
    seed: int = 0
    n_per_concept: int = 19
    outer_iters: int = 20  # total rounds; the last one only re-decodes
    sampler_sweeps: int = 100
    sampler_burnin: int = 50
    chain_restarts: int = 1  # scored warmup chains; 1 = single chain
    chain_warmup: int = 30
    n_lists: int = 10
    seg_sweeps: int = 50
    n_best: int = 5
    lm_delta: float = 0.01
    py_discount: float = 0.5
    py_strength: float = 1.0
    p_cont: float = 0.85
    seg_temperature: float = 5.0  # annealing start; 1.0 disables
    max_word_len: int = 14
    p_sub: float = 0.03
    p_ins: float = 0.01
    p_del: float = 0.01
    distance_mean: float = 1.0
    distance_sd: float = 0.2
    par_points: int = 25
    hyper: Hyperparams = field(default_factory=Hyperparams)

    def __post_init__(self):
        if isinstance(self.hyper, dict):
            self.hyper = Hyperparams(**self.hyper)
        self.validate()

    def validate(self):
        if self.method not in METHODS:
            raise ValueError(
                f"unknown method {self.method!r}, expected one of {METHODS}"
            )
        for name in (
            "n_objects", "n_per_concept", "outer_iters", "sampler_sweeps",
            "n_lists", "n_best", "par_points", "max_word_len",
            "chain_restarts",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.seg_sweeps < 0:
            raise ValueError("seg_sweeps must be non-negative")
        if self.chain_warmup < 0:
            raise ValueError("chain_warmup must be non-negative")
        if self.seg_temperature < 1.0:
            raise ValueError("seg_temperature must be at least 1.0")
        if not 0 <= self.sampler_burnin < self.sampler_sweeps:
            raise ValueError("need 0 <= sampler_burnin < sampler_sweeps")
        if self.distance_mean <= 0 or self.distance_sd <= 0:
            raise ValueError("distance parameters must be positive")
        ChannelConfig(self.p_sub, self.p_ins, self.p_del)  # validates rates
        if self.learn_objects and not self.object_words:
            # allowed, but the object slot will just model noise
            pass

    def to_json(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "RunConfig":
        return cls(**obj)

    def channel(self) -> ChannelConfig:
        return ChannelConfig(self.p_sub, self.p_ins, self.p_del)

    def distance(self) -> DistanceModel:
        return DistanceModel(self.distance_mean, 1.0 / self.distance_sd**2)


@dataclass
class RunResult:
    config: RunConfig
    scenes: list
    estimate: PointEstimate
    data: LearnData
    corpus: list
    metrics: dict
    lm: ClassTrigramLM | None
    trace: list


def run_pipeline(cfg: RunConfig, scenes=None) -> RunResult:
    """Run the full pipeline for one configuration.

    ``scenes`` can be passed to reuse a dataset; otherwise it is
    simulated from the config's seed, so two methods with the same seed
    see identical data.
    """
    t0 = time.perf_counter()
    inventory = default_inventory()
    root = np.random.SeedSequence(cfg.seed)
    data_ss, pipe_ss, eval_ss = root.spawn(3)
    if scenes is None:
        scenes = simulate_dataset(
            cfg.n_per_concept,
            cfg.n_objects,
            data_ss,
            distance=cfg.distance(),
            channel_cfg=cfg.channel(),
            object_words=DEFAULT_OBJECT_WORDS if cfg.object_words else None,
        )
    n_cats = len(DEFAULT_OBJECT_WORDS) if cfg.learn_objects else 0
    use_mi = cfg.method in ("mi", "clm_mi")
    class_lm = cfg.method in ("clm", "clm_mi")
    n_eff = cfg.n_lists if use_mi else 1
    iter_seeds = pipe_ss.spawn(cfg.outer_iters)
    trace = []

    if cfg.method == "truewords":
        corpus = [
            [tuple(inventory.tokenize(w)) for w in s.words] for s in scenes
        ]
        est, data, info = _learn_once(
            scenes, corpus, cfg, n_cats, iter_seeds[0]
        )
        trace.append(info)
        metrics = _evaluate(est, data, scenes, cfg, eval_ss, t0)
        return RunResult(cfg, scenes, est, data, corpus, metrics, None, trace)

    strings = [s.phonemes for s in scenes]
    lm = None
    est = data = corpus = None
    for it, it_ss in enumerate(iter_seeds):
        seg_ss, *chain_ss = it_ss.spawn(n_eff + 1)
        seg_rng = np.random.default_rng(seg_ss)
        final = it == cfg.outer_iters - 1 and lm is not None
        if final:
            lists = [
                CorpusList(
                    utterances=[
                        list(decode(lm, s, 1)[0][0]) for s in strings
                    ],
                    score=0.0,
                )
            ]
        elif lm is None:
            lists = sample_corpus_lists(
                strings, n_eff, cfg.seg_sweeps, seg_rng,
                n_symbols=len(inventory), d=cfg.py_discount,
                strength=cfg.py_strength, p_cont=cfg.p_cont,
                max_word_len=cfg.max_word_len,
                start_temperature=cfg.seg_temperature,
            )
        else:
            hyps = [decode(lm, s, cfg.n_best) for s in strings]
            init = [list(h[0][0]) for h in hyps]
            # evidence seats carry the decoder's vocabulary into the next
            # segmentation chain; counts are capped so corpus statistics
            # can still overturn a wrong boundary
            support = Counter(w for h in hyps for w in h[0][0])
            evidence = sorted(
                w for w, c in support.items() for _ in range(min(c, 3))
            )
            lists = sample_corpus_lists(
                strings, n_eff, cfg.seg_sweeps, seg_rng,
                n_symbols=len(inventory), d=cfg.py_discount,
                strength=cfg.py_strength, p_cont=cfg.p_cont,
                max_word_len=cfg.max_word_len, init=init, evidence=evidence,
                start_temperature=cfg.seg_temperature,
            )
        cands = []
        for cl, ss in zip(lists, chain_ss):
            cand_est, cand_data, info = _learn_once(
                scenes, cl.utterances, cfg, n_cats, ss
            )
            cands.append((info["info"], cand_est, cand_data, cl, info))
        if use_mi:
            best = max(range(len(cands)), key=lambda i: cands[i][0])
        else:
            best = 0
        _, est, data, chosen, info = cands[best]
        info = dict(info, iteration=it, n_candidates=len(cands), final=final)
        trace.append(info)
        corpus = chosen.utterances
        if not final and it < cfg.outer_iters - 1:
            loc_idx, obj_idx = None, None
            if class_lm:
                loc_idx = [int(z) for z in est.z]
                if n_cats:
                    obj_idx = [
                        int(zo) if zo >= 0 else None for zo in est.z_o
                    ]
            lm = build_lm(
                corpus, loc_idx, obj_idx,
                n_symbols=len(inventory), delta=cfg.lm_delta,
                p_cont=cfg.p_cont, max_word_len=cfg.max_word_len,
            )
    metrics = _evaluate(est, data, scenes, cfg, eval_ss, t0)
    return RunResult(cfg, scenes, est, data, corpus, metrics, lm, trace)


def _learn_once(scenes, segmentations, cfg: RunConfig, n_cats: int, ss):
    data = build_learn_data(scenes, segmentations, n_categories=n_cats)
    chain = run_chain(
        data,
        cfg.hyper,
        np.random.default_rng(ss),
        sweeps=cfg.sampler_sweeps,
        burnin=cfg.sampler_burnin,
        with_objects=n_cats > 0,
        restarts=cfg.chain_restarts,
        warmup=cfg.chain_warmup,
    )
    est = summarize(chain)
    i_r = mutual_information(est, data)
    info = {
        "i_r": i_r,
        "info": i_r,
        "log_post": est.log_post,
        "n_concepts": est.n_concepts,
        "kappa_accept": chain.kappa_accept_rate,
    }
    if n_cats:
        i_o = object_information(est, data)
        info["i_o"] = i_o
        info["info"] = i_r + i_o
    return est, data, info


def _evaluate(est: PointEstimate, data: LearnData, scenes, cfg: RunConfig,
              eval_ss, t0: float) -> dict:
    rng = np.random.default_rng(eval_ss)
    metrics = {
        "ari": ari(est.C.tolist(), [s.concept for s in scenes]),
        "par": location_word_par(
            est, data.vocab, DEFAULT_CONCEPTS, cfg.distance(),
            cfg.hyper.alpha_r, rng, n_per_concept=cfg.par_points,
        ),
        "ref_accuracy": reference_accuracy(
            est.pi, [s.reference for s in scenes]
        ),
        "i_r": mutual_information(est, data),
        "n_concepts": est.n_concepts,
        "log_post": est.log_post,
    }
    if est.phi_o is not None:
        metrics["par_obj"] = object_word_par(
            est, data.vocab, DEFAULT_OBJECT_WORDS
        )
        metrics["i_o"] = object_information(est, data)
    metrics["wall_ms"] = (time.perf_counter() - t0) * 1000.0
    return metrics


# ----- batch experiments -----


def run_experiment(
    kind: str,
    out_dir,
    trials: int = 10,
    j_values=(3, 10, 20),
    seed: int = 0,
    full: bool = False,
    progress=None,
    **overrides,
):
    """Run a grid of pipeline configurations and write ``results.csv``.

    Kinds: ``methods`` compares the five methods, ``objects`` compares
    the learner with and without the object word slot on data that
    contains object words, ``distance`` degrades the distance between
    trainer and reference object for the true-words learner under two
    sampling budgets.  A failed trial is recorded with empty metrics and
    the run continues.

    Without ``full`` the grid runs a reduced schedule (8 outer rounds,
    5 candidate lists) so the whole matrix finishes in about an hour on
    one core; ``full`` restores the published schedule and widens the
    distance grid.  Explicit overrides win either way.
    """
    import pathlib

    out_dir = pathlib.Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not full:
        overrides.setdefault("outer_iters", 8)
        overrides.setdefault("n_lists", 5)
    cells = _experiment_cells(kind, j_values, full)
    rows = []
    for cell_idx, cell in enumerate(cells):
        for t in range(trials):
            cfg = RunConfig(
                seed=seed + t,
                **{**cell["config"], **overrides},
            )
            label = cell["label"]
            if progress:
                progress(f"{label} J={cfg.n_objects} trial {t + 1}/{trials}")
            row = {
                "method": label,
                "J": cfg.n_objects,
                "seed": cfg.seed,
                "distance_mean": cfg.distance_mean,
            }
            try:
                res = run_pipeline(cfg)
                m = res.metrics
                row.update(
                    ari=m["ari"],
                    par=m["par"],
                    ref_accuracy=m["ref_accuracy"],
                    i_r=m["i_r"],
                    wall_ms=m["wall_ms"],
                    par_obj=m.get("par_obj", ""),
                    i_o=m.get("i_o", ""),
                    n_concepts=m["n_concepts"],
                    status="ok",
                )
            except Exception as exc:  # keep the grid going
                row.update(status=f"error: {exc}")
            rows.append(row)
    csv_path = out_dir / "results.csv"
    _write_results(csv_path, rows)
    manifest = {
        "kind": kind,
        "trials": trials,
        "j_values": list(j_values),
        "seed": seed,
        "full": full,
        "overrides": {
            k: (dataclasses.asdict(v) if dataclasses.is_dataclass(v) else v)
            for k, v in overrides.items()
        },
        "rows": len(rows),
        "version": __version__,
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
    return csv_path


def _experiment_cells(kind: str, j_values, full: bool) -> list:
    if kind == "methods":
        return [
            {"label": method, "config": {"method": method, "n_objects": j}}
            for j in j_values
            for method in METHODS
        ]
    if kind == "objects":
        # many candidate objects leave single chains prone to the merged
        # mode, so both arms get the same scored-restart budget
        cells = []
        for j in j_values:
            for learn_objects in (False, True):
                label = "clm_mi+o" if learn_objects else "clm_mi"
                cells.append(
                    {
                        "label": label,
                        "config": {
                            "method": "clm_mi",
                            "n_objects": j,
                            "object_words": True,
                            "learn_objects": learn_objects,
                            "chain_restarts": 8,
                        },
                    }
                )
        return cells
    if kind == "distance":
        means = range(1, 11) if full else (1, 2, 4, 6, 8, 10)
        budgets = [(100, 50), (1000, 500)] if full else [(100, 50)]
        cells = []
        for sweeps, burnin in budgets:
            for mean in means:
                cells.append(
                    {
                        "label": f"truewords@{sweeps}",
                        "config": {
                            "method": "truewords",
                            "distance_mean": float(mean),
                            "sampler_sweeps": sweeps,
                            "sampler_burnin": burnin,
                            # wide background disc so every reference
                            # choice stays inside its support
                            "hyper": Hyperparams(e=15.0),
                        },
                    }
                )
        return cells
    raise ValueError(f"unknown experiment kind {kind!r}")


def _write_results(path, rows) -> None:
    """Write rows with stable formatting so reruns are byte-identical."""
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(CSV_COLUMNS))
        writer.writeheader()
        for row in rows:
            out = {}
            for col in CSV_COLUMNS:
                v = row.get(col, "")
                if isinstance(v, float):
                    v = f"{v:.6f}"
                out[col] = v
            writer.writerow(out)


def summarize_results(csv_path):
    """Aggregate a results file: mean and spread per (method, J) cell."""
    groups: dict = {}
    with open(csv_path) as fh:
        for row in csv.DictReader(fh):
            if row.get("status") != "ok":
                continue
            key = (row["method"], int(row["J"]), float(row["distance_mean"]))
            groups.setdefault(key, []).append(row)
    summary = []
    for (method, j, dist), rows in sorted(groups.items()):
        entry = {
            "method": method,
            "J": j,
            "distance_mean": dist,
            "trials": len(rows),
        }
        for metric in ("ari", "par", "ref_accuracy", "i_r"):
            vals = [float(r[metric]) for r in rows if r[metric] != ""]
            if vals:
                entry[f"{metric}_mean"] = float(np.mean(vals))
                entry[f"{metric}_sd"] = float(np.std(vals))
        summary.append(entry)
    return summary


# ----- artifact writers -----


def save_state(path, result: RunResult) -> None:
    """Dump the learned point estimate and metrics as JSON."""
    est = result.estimate
    state = {
        "config": result.config.to_json(),
        "metrics": {
            k: (float(v) if isinstance(v, (int, float)) else v)
            for k, v in result.metrics.items()
        },
        "vocab": [" ".join(w) for w in result.data.vocab],
        "concepts": {
            "nu": est.nu.tolist(),
            "kappa": est.kappa.tolist(),
            "phi": est.phi.tolist(),
        },
        "distance": {"mu": est.mu, "lam": est.lam},
        "psi": est.psi.tolist(),
        "assignments": {
            "C": est.C.tolist(),
            "pi": est.pi.tolist(),
            "z": est.z.tolist(),
        },
        "log_post": est.log_post,
    }
    if est.phi_o is not None:
        state["objects"] = {
            "phi": est.phi_o.tolist(),
            "v": est.v_o.tolist(),
            "z_o": est.z_o.tolist(),
            "c_o": est.c_o.tolist(),
        }
    with open(path, "w") as fh:
        json.dump(state, fh, indent=1, sort_keys=True)


def save_lexicon(path, result: RunResult) -> None:
    """Dump the selected corpus segmentation's word inventory."""
    counts: dict = {}
    for words in result.corpus:
        for w in words:
            key = "".join(w)
            counts[key] = counts.get(key, 0) + 1
    lex = [
        {"word": w, "count": c}
        for w, c in sorted(counts.items(), key=lambda it: (-it[1], it[0]))
    ]
    with open(path, "w") as fh:
        json.dump(lex, fh, indent=1)
