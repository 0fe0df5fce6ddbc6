#!/usr/bin/env python3
"""A tour of the generation engine: every generator and modifier, printed
as ASCII maps.

Run from the repo root:

    python3 demos/engine_tour.py
"""

from tilesmith import (
    build_height_layers,
    gen_cellular_automata,
    gen_maze,
    gen_noise_region,
    mod_keep_largest_region,
    mod_morph,
    mod_smooth,
    scatter,
)


def show(title, grid):
    print(f"\n=== {title} ({grid.width}x{grid.height}, {grid.alive_count()} alive) ===")
    print(grid.to_ascii())


# Cellular automata make organic cave/island masses. The same seed always
# gives the same map; try changing it.
raw = gen_cellular_automata(seed=42, width=40, height=20, fill_probability=0.48, iterations=5)
show("cellular automata, raw", raw)

# A majority filter knocks off single-cell noise...
smoothed = mod_smooth(raw, iterations=1)
show("after one smoothing pass", smoothed)

# ...and keeping only the largest connected region guarantees one land mass.
island = mod_keep_largest_region(smoothed, connectivity="eight")
show("largest region only", island)

# Erosion shrinks the mass inward; this is how height tiers get smaller.
peak = mod_morph(island, op="erode", radius=2)
show("eroded by radius 2", peak)

# Stacked height tiers: tier k is the base eroded by k * shrink_radius.
layers = build_height_layers(island, tiers=3, shrink_radius=2, material="terrain")
for layer in layers:
    print(f"\nlayer {layer.name}: height {layer.height_index}, "
          f"{layer.grid.alive_count()} cells of {layer.material}")

# Scatter places objects on (or off) a mask with a per-cell coin flip.
rocks = scatter(island, mode="off_mask", density=0.05, seed=7, kind="rock", layer_name="tier_0")
print(f"\nscattered {len(rocks)} rocks on the water around the island")

# Value noise gives softer, broader shapes than the automaton.
beach = gen_noise_region(seed=7, width=40, height=20, frequency=0.08, octaves=3, threshold=0.5)
show("value-noise region", beach)

# And the maze generator produces perfect mazes: exactly one corridor path
# between any two corridor cells.
maze = gen_maze(seed=3, width=39, height=19)
show("perfect maze (walls alive)", maze)
