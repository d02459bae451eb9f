"""Does the J=20 +O lock rate rise with sweep budget?"""
import sys
import time

sys.path.insert(0, "/root/pkg/src")

from relspace.pipeline import RunConfig, run_pipeline

for sweeps, burnin in ((100, 50), (300, 150), (1000, 500)):
    aris, refs = [], []
    t0 = time.perf_counter()
    for seed in range(10):
        cfg = RunConfig(
            method="truewords",
            object_words=True,
            learn_objects=True,
            n_objects=20,
            seed=seed,
            sampler_sweeps=sweeps,
            sampler_burnin=burnin,
        )
        res = run_pipeline(cfg)
        aris.append(res.metrics["ari"])
        refs.append(res.metrics["ref_accuracy"])
    dt = time.perf_counter() - t0
    locks = sum(1 for r in refs if r > 0.5)
    print(
        f"sweeps={sweeps:4d} ari={sum(aris)/10:.3f} ref={sum(refs)/10:.3f} "
        f"locks={locks}/10 refs={[round(r,2) for r in refs]} ({dt:.0f}s)",
        flush=True,
    )
