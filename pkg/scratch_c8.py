import time

from theoryforge import env, evolve

# criterion-8 rehearsal: pick desk-scale knobs that are fast enough for
# the acceptance suite while showing strict improvement in >=3/4 seeds
t_all = time.monotonic()
wins = 0
for seed in range(4):
    cfg = evolve.EvoConfig(
        islands=2,
        generations=16,
        abstraction_frequency=8,
        eval_rollouts=3,
        seed=seed,
    )
    rc = env.RolloutConfig(episode_step_cap=14, seed=100 + seed)
    t0 = time.monotonic()
    report = evolve.run_evoabstract(cfg, rc, "arithmetic_base", workers=8)
    dt = time.monotonic() - t0
    improved = report.best_fitness > report.seed_fitness
    wins += improved
    abs_counts = [len(isl.library) for isl in report.islands]
    print(
        f"seed {seed}: seed_fit={report.seed_fitness:.3f} best={report.best_fitness:.3f} "
        f"improved={improved} libs={abs_counts} {dt:.1f}s"
    )
    print("  curve:", [round(x, 2) for x in report.curve])
print(f"wins: {wins}/4 in {time.monotonic() - t_all:.1f}s total")
