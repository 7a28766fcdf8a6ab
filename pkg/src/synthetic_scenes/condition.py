"""Deterministic conditioning vector y for a (scene, prompt) pair.

y = [scene block (4 slots x 16) | prompt block (32)], 96 values. Slot 0
describes the prompted object, the remaining slots the other objects in
scene order. A slot holds:

    x/E, y/E, scale/E, sin r, cos r, one-hot shape (4), present,
    sin 2r, cos 2r, zero padding

all multiplied by SCENE_SCALE. Empty slots are all zero. The prompt block
is a unit vector drawn from a generator seeded by a stable 64-bit hash of
"{shape}|{part}|{index}".
"""
import hashlib
import math
from functools import lru_cache
from typing import List

import numpy as np

from src.synthetic_scenes.scene import Prompt, Scene, SceneObject
from src.synthetic_scenes.shapes import SHAPE_CLASSES

N_SLOTS = 4
SLOT_DIM = 16
SCENE_DIM = N_SLOTS * SLOT_DIM
PROMPT_DIM = 32
COND_DIM = SCENE_DIM + PROMPT_DIM
# keeps the scene block's spread below the gap between prompt vectors
SCENE_SCALE = 0.5


def stable_hash64(text: str) -> int:
    return int.from_bytes(
        hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest(), "big"
    )


@lru_cache(maxsize=None)
def _prompt_vector(key: str) -> tuple:
    vec = np.random.default_rng(stable_hash64(key)).standard_normal(PROMPT_DIM)
    return tuple(vec / np.linalg.norm(vec))


def prompt_embedding(
    shape_class: str, part_name: str, object_index: int
) -> np.ndarray:
    key = f"{shape_class}|{part_name}|{object_index}"
    return np.array(_prompt_vector(key))


def object_descriptor(obj: SceneObject, extent: float) -> np.ndarray:
    slot = np.zeros(SLOT_DIM)
    r = obj.rotation
    slot[0:5] = (
        obj.position[0] / extent,
        obj.position[1] / extent,
        obj.scale / extent,
        math.sin(r),
        math.cos(r),
    )
    slot[5 + SHAPE_CLASSES.index(obj.shape_class)] = 1.0
    slot[9] = 1.0
    slot[10:12] = (math.sin(2 * r), math.cos(2 * r))
    return SCENE_SCALE * slot


def slot_order(scene: Scene, object_index: int) -> List[int]:
    """Object indices in slot order: the prompted object, then the rest."""
    described = range(min(len(scene.objects), N_SLOTS))
    return [object_index] + [i for i in described if i != object_index]


def encode_condition(scene: Scene, prompt: Prompt) -> np.ndarray:
    if not 0 <= prompt.object_index < min(len(scene.objects), N_SLOTS):
        raise ValueError(
            f"{__name__} ERROR: prompt targets object {prompt.object_index}, "
            f"only the first {N_SLOTS} objects are described"
        )
    y = np.zeros(COND_DIM)
    for slot, i in enumerate(slot_order(scene, prompt.object_index)):
        start = slot * SLOT_DIM
        y[start : start + SLOT_DIM] = object_descriptor(
            scene.objects[i], scene.extent
        )
    shape = scene.objects[prompt.object_index].shape_class
    y[SCENE_DIM:] = prompt_embedding(
        shape, prompt.part_name, prompt.object_index
    )
    return y
