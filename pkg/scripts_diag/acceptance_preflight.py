"""Measure the heavy acceptance groups ahead of the test run.

Order: C5 exact-word rate (riskiest), C6 gaps at 20 trials, C7 J=20 arm,
C8 remaining seeds 4-9 for all four cells.
"""
import sys
import time

sys.path.insert(0, "/root/pkg/src")

import numpy as np

from relspace.pipeline import RunConfig, run_pipeline

TRUE_WORDS = {"mae", "ushiro", "migi", "hidari"}


def learned_words(res):
    est, vocab = res.estimate, res.data.vocab
    return {"".join(vocab[int(np.argmax(row))]) for row in est.phi}


# ----- C5: clm_mi J=3 low noise, 10 seeds (shared with C7 J=3 arm) -----
exact = 0
pars, aris, refs = [], [], []
for seed in range(10):
    t0 = time.perf_counter()
    cfg = RunConfig(method="clm_mi", n_objects=3, seed=seed,
                    outer_iters=8, n_lists=5)
    res = run_pipeline(cfg)
    words = learned_words(res)
    hit = words == TRUE_WORDS
    exact += hit
    pars.append(res.metrics["par"])
    aris.append(res.metrics["ari"])
    refs.append(res.metrics["ref_accuracy"])
    print(f"C5 seed={seed} par={res.metrics['par']:.3f} "
          f"ari={res.metrics['ari']:.3f} ref={res.metrics['ref_accuracy']:.3f} "
          f"exact={hit} words={sorted(words)} "
          f"({time.perf_counter()-t0:.0f}s)", flush=True)
print(f"== C5: exact {exact}/10 mean_par={np.mean(pars):.3f} | "
      f"C7a mean_ari={np.mean(aris):.3f} mean_ref={np.mean(refs):.3f}",
      flush=True)

# ----- C6: clm_mi vs baseline, J=3, elevated noise, 20 trials -----
means = {}
for method in ("clm_mi", "baseline"):
    aris, pars = [], []
    for seed in range(20):
        t0 = time.perf_counter()
        cfg = RunConfig(method=method, n_objects=3, seed=seed,
                        outer_iters=8, n_lists=5,
                        p_sub=0.08, p_ins=0.03, p_del=0.03)
        res = run_pipeline(cfg)
        aris.append(res.metrics["ari"])
        pars.append(res.metrics["par"])
        print(f"C6 {method} seed={seed} ari={res.metrics['ari']:.3f} "
              f"par={res.metrics['par']:.3f} "
              f"({time.perf_counter()-t0:.0f}s)", flush=True)
    means[method] = (np.mean(aris), np.mean(pars))
    print(f"== C6 {method}: mean ari={means[method][0]:.3f} "
          f"par={means[method][1]:.3f}", flush=True)
print(f"== C6 gaps: ari={means['clm_mi'][0]-means['baseline'][0]:+.3f} "
      f"par={means['clm_mi'][1]-means['baseline'][1]:+.3f}", flush=True)

# ----- C7 J=20 arm: clm_mi low noise, 10 seeds -----
aris, refs = [], []
for seed in range(10):
    t0 = time.perf_counter()
    cfg = RunConfig(method="clm_mi", n_objects=20, seed=seed,
                    outer_iters=8, n_lists=5)
    res = run_pipeline(cfg)
    aris.append(res.metrics["ari"])
    refs.append(res.metrics["ref_accuracy"])
    print(f"C7b seed={seed} ari={res.metrics['ari']:.3f} "
          f"ref={res.metrics['ref_accuracy']:.3f} "
          f"({time.perf_counter()-t0:.0f}s)", flush=True)
print(f"== C7b J=20: mean ari={np.mean(aris):.3f} ref={np.mean(refs):.3f}",
      flush=True)

# ----- C8 remaining seeds 4-9 (spot covered 0-3) -----
for J in (10, 20):
    for learn_obj in (False, True):
        aris, refs = [], []
        for seed in range(4, 10):
            t0 = time.perf_counter()
            cfg = RunConfig(method="clm_mi", object_words=True,
                            learn_objects=learn_obj, n_objects=J,
                            seed=seed, outer_iters=8, n_lists=5,
                            chain_restarts=8)
            res = run_pipeline(cfg)
            aris.append(res.metrics["ari"])
            refs.append(res.metrics["ref_accuracy"])
            print(f"C8 J={J:2d} obj={learn_obj!s:5s} seed={seed} "
                  f"ari={res.metrics['ari']:.3f} "
                  f"ref={res.metrics['ref_accuracy']:.3f} "
                  f"({time.perf_counter()-t0:.0f}s)", flush=True)
        print(f"== C8 J={J:2d} obj={learn_obj!s:5s} seeds4-9: "
              f"mean ari={np.mean(aris):.3f} ref={np.mean(refs):.3f}",
              flush=True)
print("preflight done", flush=True)
