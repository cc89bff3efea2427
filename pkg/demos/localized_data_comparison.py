#!/usr/bin/env python3
"""Why couple a network to the physical model? Localized data.

When sensors only cover the quadrant [0, pi]^2, fitting the physical
model alone overfits the visible corner and misplaces the coefficient
bumps. The co-trained pair does better: the network extends the data,
the ghost coupling carries that information to the physical player.

Runs two reduced trainings and prints the head-to-head numbers.
Takes about a minute.
"""
from hyco.baselines import fit_physics_only
from hyco.engine import train_hyco
from hyco.experiments import build_preset, generate_dataset

config = {
    "kind": "helmholtz",
    "scenario": {"n": 14, "fine_n": 32, "region": "q2", "M": 25, "sampling": "static"},
    "train": {
        "epochs": 600,
        "lr_phy": 0.3,
        "lr_syn": 1e-3,
        "optimizer": "gd",
        "H": 100,
        "hidden_layers": [64, 64],
        "activation": "relu",
        "residual": True,
        "seed": 0,
    },
    "meta": {"dataset_seed": 1234, "noise_gamma": 0.0},
}

scenario, cfg, meta = build_preset(config, "demo_q2")
dataset = generate_dataset(scenario, meta["dataset_seed"])
print(f"sensors confined to x, y >= 0 ({len(dataset.points)} points)")

results = {}
results["hyco"] = train_hyco(scenario, dataset, cfg)
results["physics_only"] = fit_physics_only(scenario, dataset, cfg)

print()
print(f"{'method':>14} {'e_p':>8} {'e_s':>8} {'e_d':>10}")
for name, res in results.items():
    row = res.history[-1]
    print(f"{name:>14} {row['e_p']:8.4f} {row['e_s']:8.4f} {row['e_d']:10.2e}")

print()
print("with sensors confined to one corner the physics-only fit misplaces")
print("the coefficient bumps; the coupled run pins them down by leaning on")
print("the network's extension of the data.")
