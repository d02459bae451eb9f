"""Scene simulator: spatial teaching episodes plus a noisy phoneme channel.

Each scene places a robot and ``J`` objects in a square room, picks one
object as the reference, draws the trainer's position from the scene's
concept relative to that object, and utters a short sentence containing
the concept's word.  The sentence is flattened to a phoneme string and
passed through a substitution/insertion/deletion channel, which is all
the learner gets to see.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import DistanceModel, VonMises, vm_sample
from .geometry import Pose2, RelativeCoord, frame_for, to_world
from .phonemes import PhonemeInventory, default_inventory

ROOM_HALF = 5.0
MIN_SEPARATION = 0.1

# Background objects sit at a uniform distance from the trainer in a
# uniform world direction, so they are plausible but wrong anchors.
BG_DIST_MIN = 0.1
BG_DIST_MAX = 5.0


@dataclass(frozen=True)
class ConceptSpec:
    """A true spatial concept: its word and its direction distribution."""

    name: str
    word: str
    mean_angle: float
    concentration: float


DEFAULT_CONCEPTS = (
    ConceptSpec("front", "mae", 0.0, 14.0),
    ConceptSpec("back", "ushiro", math.pi / 2.0, 14.0),
    ConceptSpec("right", "migi", math.pi, 14.0),
    ConceptSpec("left", "hidari", 3.0 * math.pi / 2.0, 14.0),
)

DEFAULT_DISTANCE = DistanceModel(mu=1.0, lam=25.0)

# Object vocabulary for the object-word variant; index = category id.
DEFAULT_OBJECT_WORDS = ("terebi", "seNpuuki", "sukuriiN", "tsukue", "pasokoN")

FUNCTION_WORDS = ("no", "yori")

# Sentence frames; "*" marks the slot the location phrase fills.
UTTERANCE_TEMPLATES = (
    ("*", "dane"),
    ("*", "dayo"),
    ("*", "desu"),
    ("*", "niirune"),
    ("*", "niiruyo"),
    ("*", "niimasu"),
    ("*", "nikimashita"),
    ("kokowa", "*"),
    ("kokononamaewa", "*"),
    ("konobashowa", "*"),
    ("kokowa", "*", "dane"),
    ("kokowa", "*", "dayo"),
    ("kokowa", "*", "desu"),
    ("kokononamaewa", "*", "dane"),
    ("kokononamaewa", "*", "dayo"),
    ("kokononamaewa", "*", "desu"),
    ("konobashowa", "*", "dane"),
    ("konobashowa", "*", "dayo"),
    ("konobashowa", "*", "desu"),
)


@dataclass(frozen=True)
class ChannelConfig:
    """Per-phoneme noise rates for the articulation/recognition channel."""

    p_sub: float = 0.03
    p_ins: float = 0.01
    p_del: float = 0.01

    def __post_init__(self):
        for name in ("p_sub", "p_ins", "p_del"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.p_sub + self.p_del > 1.0:
            raise ValueError("p_sub + p_del must not exceed 1")


@dataclass
class Scene:
    """One teaching episode.

    ``words`` is the clean word sequence actually spoken and ``phonemes``
    the channel output; ``loc_index``/``obj_index`` point at the location
    and object word inside ``words`` (``obj_index`` is None when no
    object word was uttered).
    """

    id: int
    robot: Pose2
    objects: list
    categories: list
    reference: int
    concept: int
    trainer: Pose2
    words: tuple = ()
    loc_index: int = -1
    obj_index: int | None = None
    phonemes: tuple = ()


def generate_scenes(
    n_per_concept: int,
    n_objects: int,
    rng: np.random.Generator,
    concepts=DEFAULT_CONCEPTS,
    distance: DistanceModel = DEFAULT_DISTANCE,
    n_categories: int = len(DEFAULT_OBJECT_WORDS),
    room_half: float = ROOM_HALF,
) -> list[Scene]:
    """Generate geometric scenes cycling through the concepts in order.

    Scene ``i`` teaches concept ``i mod len(concepts)``, so every concept
    gets ``n_per_concept`` scenes.
    """
    if n_objects < 1:
        raise ValueError("need at least one object per scene")
    scenes = []
    for i in range(n_per_concept * len(concepts)):
        spec = concepts[i % len(concepts)]
        robot = _uniform_pose(rng, room_half)
        ref_pos = _uniform_pose(rng, room_half)
        while robot.distance_to(ref_pos) < MIN_SEPARATION:
            ref_pos = _uniform_pose(rng, room_half)
        # Distances are modelled with an untruncated Gaussian; the tiny
        # negative tail is redrawn so the geometry stays valid.
        l = distance.sample(rng)
        while l <= 0.0:
            l = distance.sample(rng)
        theta = float(
            vm_sample(VonMises(spec.mean_angle, spec.concentration), rng)
        )
        trainer = to_world(frame_for(ref_pos, robot), RelativeCoord(l, theta))
        reference = int(rng.integers(n_objects))
        objects = []
        for j in range(n_objects):
            if j == reference:
                objects.append(ref_pos)
            else:
                objects.append(_background_object(trainer, robot, rng))
        categories = [int(k) for k in rng.integers(n_categories, size=n_objects)]
        scenes.append(
            Scene(
                id=i,
                robot=robot,
                objects=objects,
                categories=categories,
                reference=reference,
                concept=i % len(concepts),
                trainer=trainer,
            )
        )
    return scenes


def _uniform_pose(rng: np.random.Generator, room_half: float) -> Pose2:
    xy = rng.uniform(-room_half, room_half, size=2)
    return Pose2(float(xy[0]), float(xy[1]))


def _background_object(trainer: Pose2, robot: Pose2,
                       rng: np.random.Generator) -> Pose2:
    while True:
        u = float(rng.uniform(BG_DIST_MIN, BG_DIST_MAX))
        ang = float(rng.uniform(0.0, 2.0 * math.pi))
        pos = Pose2(trainer.x + u * math.cos(ang), trainer.y + u * math.sin(ang))
        # An object exactly under the robot would leave its frame bearing
        # undefined later, so nudge those astronomically rare draws away.
        if pos.distance_to(robot) >= 1e-9:
            return pos


def render_utterance(
    scene: Scene,
    rng: np.random.Generator,
    concepts=DEFAULT_CONCEPTS,
    object_words=None,
    templates=UTTERANCE_TEMPLATES,
) -> None:
    """Fill in the scene's word sequence from a random sentence frame.

    With ``object_words`` set, the location phrase becomes
    ``<object word> <no|yori> <location word>`` where the object word
    names the reference object's category.
    """
    template = templates[int(rng.integers(len(templates)))]
    loc_word = concepts[scene.concept].word
    if object_words is None:
        phrase = [loc_word]
        obj_offset = None
    else:
        obj_word = object_words[scene.categories[scene.reference]]
        func = FUNCTION_WORDS[int(rng.integers(len(FUNCTION_WORDS)))]
        phrase = [obj_word, func, loc_word]
        obj_offset = 0
    words = []
    loc_index = -1
    obj_index = None
    for part in template:
        if part == "*":
            if obj_offset is not None:
                obj_index = len(words) + obj_offset
            loc_index = len(words) + len(phrase) - 1
            words.extend(phrase)
        else:
            words.append(part)
    scene.words = tuple(words)
    scene.loc_index = loc_index
    scene.obj_index = obj_index


def channel(
    words,
    cfg: ChannelConfig,
    rng: np.random.Generator,
    inventory: PhonemeInventory | None = None,
) -> tuple[str, ...]:
    """Concatenate ``words`` and corrupt the phoneme string.

    Each phoneme is independently deleted, substituted (uniformly over
    the other symbols) or kept, and a uniform random symbol is inserted
    after each original position with probability ``p_ins``.  The output
    is re-tokenized so downstream code always sees the canonical greedy
    parse.  Empty outputs are redrawn a bounded number of times, then
    fall back to a single surviving phoneme.
    """
    if inventory is None:
        inventory = default_inventory()
    clean = [t for w in words for t in inventory.tokenize(w)]
    if not clean:
        raise ValueError("channel input must contain at least one phoneme")
    n_sym = len(inventory)
    for _ in range(50):
        out = []
        for t in clean:
            r = rng.random()
            if r < cfg.p_del:
                pass
            elif r < cfg.p_del + cfg.p_sub:
                k = int(rng.integers(n_sym - 1))
                if k >= inventory.index[t]:
                    k += 1
                out.append(inventory.symbols[k])
            else:
                out.append(t)
            if rng.random() < cfg.p_ins:
                out.append(inventory.symbols[int(rng.integers(n_sym))])
        if out:
            return inventory.tokenize(inventory.detokenize(out))
    return (clean[int(rng.integers(len(clean)))],)


def simulate_dataset(
    n_per_concept: int,
    n_objects: int,
    seed,
    concepts=DEFAULT_CONCEPTS,
    distance: DistanceModel = DEFAULT_DISTANCE,
    channel_cfg: ChannelConfig = ChannelConfig(),
    object_words=None,
    n_categories: int = len(DEFAULT_OBJECT_WORDS),
) -> list[Scene]:
    """Generate a full dataset: geometry, utterances and channel output.

    ``seed`` may be an int or a ``numpy.random.SeedSequence``; every
    scene gets its own child stream so datasets are reproducible even if
    per-scene draw counts change.
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    geom_ss, utt_ss = ss.spawn(2)
    scenes = generate_scenes(
        n_per_concept,
        n_objects,
        np.random.default_rng(geom_ss),
        concepts=concepts,
        distance=distance,
        n_categories=n_categories,
    )
    for scene, child in zip(scenes, utt_ss.spawn(len(scenes))):
        rng = np.random.default_rng(child)
        render_utterance(scene, rng, concepts=concepts, object_words=object_words)
        scene.phonemes = channel(scene.words, channel_cfg, rng)
    return scenes


def save_scenes(path, scenes) -> None:
    """Write scenes as one JSON object per line."""
    with open(path, "w") as fh:
        for s in scenes:
            rec = {
                "id": s.id,
                "robot": [s.robot.x, s.robot.y],
                "objects": [[p.x, p.y] for p in s.objects],
                "categories": list(s.categories),
                "reference": s.reference,
                "concept": s.concept,
                "trainer": [s.trainer.x, s.trainer.y],
                "words": list(s.words),
                "loc_index": s.loc_index,
                "obj_index": s.obj_index,
                "phonemes": "".join(s.phonemes),
            }
            fh.write(json.dumps(rec) + "\n")


def load_scenes(path, inventory: PhonemeInventory | None = None) -> list[Scene]:
    if inventory is None:
        inventory = default_inventory()
    scenes = []
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            scenes.append(
                Scene(
                    id=rec["id"],
                    robot=Pose2(*rec["robot"]),
                    objects=[Pose2(*p) for p in rec["objects"]],
                    categories=list(rec["categories"]),
                    reference=rec["reference"],
                    concept=rec["concept"],
                    trainer=Pose2(*rec["trainer"]),
                    words=tuple(rec["words"]),
                    loc_index=rec["loc_index"],
                    obj_index=rec["obj_index"],
                    phonemes=inventory.tokenize(rec["phonemes"]),
                )
            )
    return scenes
