"""TRUEWORDS lock rates with scored restarts, J in {10, 20}."""
import sys
import time

sys.path.insert(0, "/root/pkg/src")

from relspace.pipeline import RunConfig, run_pipeline

for J in (10, 20):
    for learn_obj in (False, True):
        aris, refs = [], []
        t0 = time.perf_counter()
        for seed in range(10):
            cfg = RunConfig(
                method="truewords",
                object_words=True,
                learn_objects=learn_obj,
                n_objects=J,
                seed=seed,
                chain_restarts=8,
            )
            res = run_pipeline(cfg)
            aris.append(res.metrics["ari"])
            refs.append(res.metrics["ref_accuracy"])
        dt = time.perf_counter() - t0
        locks = sum(1 for r in refs if r > 0.5)
        print(
            f"J={J:2d} obj={learn_obj!s:5s} ari={sum(aris)/10:.3f} "
            f"ref={sum(refs)/10:.3f} locks={locks}/10 "
            f"refs={[round(r,2) for r in refs]} ({dt:.0f}s)",
            flush=True,
        )
