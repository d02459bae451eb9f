"""Full-pipeline objects spot: clm_mi vs clm_mi+O at J in {10, 20}."""
import sys
import time

sys.path.insert(0, "/root/pkg/src")

from relspace.pipeline import RunConfig, run_pipeline

for J in (10, 20):
    for learn_obj in (False, True):
        aris, refs, pars = [], [], []
        for seed in range(4):
            t0 = time.perf_counter()
            cfg = RunConfig(
                method="clm_mi",
                object_words=True,
                learn_objects=learn_obj,
                n_objects=J,
                seed=seed,
                outer_iters=8,
                n_lists=5,
                chain_restarts=8,
            )
            res = run_pipeline(cfg)
            dt = time.perf_counter() - t0
            aris.append(res.metrics["ari"])
            refs.append(res.metrics["ref_accuracy"])
            pars.append(res.metrics["par"])
            print(
                f"J={J:2d} obj={learn_obj!s:5s} seed={seed} "
                f"ari={res.metrics['ari']:.3f} "
                f"ref={res.metrics['ref_accuracy']:.3f} "
                f"par={res.metrics['par']:.3f} ({dt:.0f}s)",
                flush=True,
            )
        n = len(aris)
        print(
            f"== J={J:2d} obj={learn_obj!s:5s} mean ari={sum(aris)/n:.3f} "
            f"ref={sum(refs)/n:.3f} par={sum(pars)/n:.3f}",
            flush=True,
        )
