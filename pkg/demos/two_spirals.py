"""Semi-supervised labelling of two interlocking spirals from 30 revealed labels."""
from hyperdiffusion.experiments import ExperimentConfig, bench_manifold, manifold_summary

rows = bench_manifold(ExperimentConfig(dataset="two-spirals", trials=5, steps=(10, 30, 100)), write=False)
for r in manifold_summary(rows):
    print(f"{r['method']:>10}  steps={r['steps']:>3}  median AUC={r['median_auc']:.4f}  median errors={r['median_error']:.0f}")
