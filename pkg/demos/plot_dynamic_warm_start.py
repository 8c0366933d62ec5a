"""
Tracking a moving object with warm starts
==========================================

Each frame of a slow translation is imaged with only 100 generations.
Handing the previous frame's population to the next one lets image
quality build up over the sequence instead of restarting every frame.
"""

import numpy as np

from segi import GaConfig, evolve, psnr, warm_start
from segi.experiments import substream
from segi.scenes import (
    MotionPhase,
    SceneSpec,
    Translate,
    generate_frames,
    rasterize,
    shapes_object,
    transform_matrix,
)

# Shift the object left first so it stays in view for all 40 frames.
base = rasterize(shapes_object(), transform_matrix(Translate(-10, 0), (64, 64)))
frames = generate_frames(SceneSpec(base, [MotionPhase(40, Translate(0.5, 0))]))

config = GaConfig(population=30, generations=100, k=1)
seed = 0

state = None
for i, frame in enumerate(frames, start=1):
    rng = substream(seed, 0, i)
    initial = None if state is None else warm_start(state, frame, config, rng=rng)
    trace = evolve(config, frame, rng=rng, initial=initial)
    state = trace.state
    if i % 5 == 0 or i == 1:
        # a cold start sees only this frame's 100 generations
        cold = evolve(config, frame, rng=substream(seed, 1, i)).result
        print(f"frame {i:2d}  warm {psnr(frame, trace.result):5.2f} dB  cold {psnr(frame, cold):5.2f} dB")

# The mutation schedule keeps decaying across frames.
print(f"generation counter after the scene: {state.generation}")
