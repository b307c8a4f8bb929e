"""Miniature end-to-end run: synthesize, featurize, train, score.

Everything below is seeded, so rerunning the script reproduces the same
numbers bit for bit.  The dataset is deliberately small (one short
recording per class) to finish in under a minute; the shipped test suite
runs the full-size version of this experiment as its accuracy gate.
"""

import numpy as np

from tdafault.data import SplitConfig, SynthConfig, build_dataset, gen_synthetic
from tdafault.model import ModelConfig, TdaEncoder
from tdafault.train import TrainConfig, evaluate, train

synth = SynthConfig(sample_rate_hz=2048.0, duration_s=8.0, recordings_per_class=1,
                    noise_sigma=0.1, seed=11)
dataset = build_dataset(
    gen_synthetic(synth),
    split=SplitConfig(segment_len=8),
    period_hint_hz=synth.shaft_hz,
)
print(f"dataset: {len(dataset.train)}/{len(dataset.val)}/{len(dataset.test)} "
      f"train/val/test segments, {len(dataset.labels)} classes")

model = TdaEncoder(ModelConfig(d_model=16, d_k=8, d_v=8, heads=2, layers=1,
                               n_classes=len(dataset.labels), t_max=8,
                               dropout_rate=0.0, seed=5))
cfg = TrainConfig(learning_rate=3e-3, batch_size=16, max_epochs=25, patience=8,
                  seed=5)
result = train(model, dataset.train, dataset.val, cfg)

print(f"trained {result.epochs_run} epochs "
      f"(best epoch {result.best_epoch}, val loss {result.best_val_loss:.4f}"
      f"{', stopped early' if result.stopped_early else ''})")
first, last = result.history[0], result.history[-1]
print(f"train loss {first['train_loss']:.3f} -> {last['train_loss']:.3f}, "
      f"val accuracy {first['val_accuracy']:.2f} -> {last['val_accuracy']:.2f}")

report, loss = evaluate(model, dataset.test, dataset.labels)
print(f"\ntest mean loss {loss:.4f}")
print(report.to_text())

worst = min(report.per_class, key=lambda r: r.f1)
print(f"\nweakest class by F1: {worst.label} "
      f"(precision {worst.precision:.2f}, recall {worst.recall:.2f})")
