"""
Synthetic low-light datasets.

A dataset directory holds ``manifest.json``, one LFRW raw per view under
``raw/`` and the clean linear ground truth per view under ``gt/`` as float64
``.npy`` arrays. The manifest records the exact poses, the intrinsics and the
degradation that produced the raws, which is the oracle for the learned
sensor response.
"""

import json
import logging
import shutil
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..config import check_known_keys, get_config_manager, get_thread_count
from ..errors import ConfigError, DatasetError
from ..rawproc import (
    LinearRGBImage,
    RawImage,
    add_noise,
    demosaic_bilinear,
    encode_sensor_levels,
    mosaic,
    read_raw,
    scale_exposure,
    subtract_black_level,
    write_raw,
)
from ..render import camera_rays, quadrature_weights, sample_stratified
from .poses import generate_poses, intrinsics_for
from .presets import PRESETS, get_preset
from .scene import Primitive, SyntheticScene, build_scene, load_scene_spec

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = 1
SQRT3 = float(np.sqrt(3.0))


@dataclass
class Degradation:
    """Known low-light degradation: dimming, color cast and sensor noise."""

    dim_factor: float = 0.05
    tint: Tuple[float, float, float] = (0.7, 1.0, 1.3)
    beta: float = 0.05
    delta: float = 0.01

    def __post_init__(self):
        self.tint = tuple(float(t) for t in self.tint)
        if len(self.tint) != 3 or any(t <= 0.0 for t in self.tint):
            raise ConfigError(f"tint must be three positive gains, got {self.tint}")
        if not 0.0 < self.dim_factor <= 1.0:
            raise ConfigError(f"dim_factor must lie in (0, 1], got {self.dim_factor}")
        if self.beta < 0.0 or self.delta < 0.0:
            raise ConfigError("noise parameters must be nonnegative")

    @property
    def gains(self) -> np.ndarray:
        return self.dim_factor * np.asarray(self.tint)

    @property
    def oracle_response(self) -> np.ndarray:
        """Per-channel response that undoes the degradation, up to global scale."""
        return 1.0 / self.gains

    def to_dict(self) -> Dict[str, Any]:
        return {"dim": self.dim_factor, "tint": list(self.tint), "beta": self.beta, "delta": self.delta}

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "Degradation":
        try:
            return cls(
                dim_factor=float(values["dim"]),
                tint=tuple(values["tint"]),
                beta=float(values["beta"]),
                delta=float(values["delta"]),
            )
        except KeyError as exc:
            raise DatasetError(f"degradation record is missing {exc}") from None


@dataclass
class ViewRecord:
    """One camera of the dataset."""

    pose: List[float]
    fx: float
    fy: float
    cx: float
    cy: float
    raw_path: str
    gt_path: str
    split: str = "train"

    @property
    def pose_matrix(self) -> np.ndarray:
        return np.asarray(self.pose, dtype=np.float64).reshape(3, 4)

    @property
    def intrinsics(self) -> Tuple[float, float, float, float]:
        return (self.fx, self.fy, self.cx, self.cy)


@dataclass
class DatasetManifest:
    """Everything needed to rebuild rays and check results for a dataset."""

    width: int
    height: int
    near: float
    far: float
    degradation: Degradation
    views: List[ViewRecord]
    seed: int = 0
    scene: str = "spheres"
    nominal_lux: float = 0.05
    exposure_ratio: float = 1.0
    black_level: float = 64.0
    white_level: float = 1023.0

    def __post_init__(self):
        if not 0.0 < self.near < self.far:
            raise DatasetError(f"manifest needs 0 < near < far, got {self.near}, {self.far}")
        if self.width % 2 or self.height % 2:
            raise DatasetError(f"image size must be even, got {self.width}x{self.height}")

    @property
    def n_views(self) -> int:
        return len(self.views)

    def indices(self, split: str) -> List[int]:
        return [i for i, v in enumerate(self.views) if v.split == split]

    @property
    def train_indices(self) -> List[int]:
        return self.indices("train")

    @property
    def test_indices(self) -> List[int]:
        return self.indices("test")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "version": MANIFEST_VERSION,
            "width": self.width,
            "height": self.height,
            "near": self.near,
            "far": self.far,
            "seed": self.seed,
            "scene": self.scene,
            "nominal_lux": self.nominal_lux,
            "exposure_ratio": self.exposure_ratio,
            "black_level": self.black_level,
            "white_level": self.white_level,
            "degradation": self.degradation.to_dict(),
            "views": [asdict(v) for v in self.views],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DatasetManifest":
        if data.get("version") != MANIFEST_VERSION:
            raise DatasetError(f"unsupported manifest version {data.get('version')}")
        try:
            views = [ViewRecord(**v) for v in data["views"]]
            return cls(
                width=int(data["width"]),
                height=int(data["height"]),
                near=float(data["near"]),
                far=float(data["far"]),
                degradation=Degradation.from_dict(data["degradation"]),
                views=views,
                seed=int(data["seed"]),
                scene=str(data.get("scene", "")),
                nominal_lux=float(data.get("nominal_lux", 0.0)),
                exposure_ratio=float(data.get("exposure_ratio", 1.0)),
                black_level=float(data.get("black_level", 0.0)),
                white_level=float(data.get("white_level", 1.0)),
            )
        except (KeyError, TypeError) as exc:
            raise DatasetError(f"malformed manifest: {exc}") from exc

    def write(self, path: Union[str, Path]) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2)

    @classmethod
    def read(cls, path: Union[str, Path]) -> "DatasetManifest":
        path = Path(path)
        if path.is_dir():
            path = path / MANIFEST_NAME
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except FileNotFoundError:
            raise DatasetError(f"manifest not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise DatasetError(f"cannot parse {path}: {exc}") from exc
        return cls.from_dict(data)


@dataclass
class SynthesizeConfig:
    """Defaults for dataset generation (``[synthesize]`` in config/synthesize.toml)."""

    scene: str = "spheres"
    views: int = 20
    width: int = 64
    height: int = 64
    dim: float = 0.05
    tint: Tuple[float, float, float] = (0.7, 1.0, 1.3)
    beta: float = 0.05
    delta: float = 0.01
    seed: int = 0
    radius: float = 4.0
    fov: float = 40.0
    elevation: Tuple[float, float] = (15.0, 35.0)
    resolution: int = 48
    gt_samples: int = 192
    test_every: int = 5
    black_level: float = 64.0
    white_level: float = 1023.0

    def __post_init__(self):
        self.tint = tuple(float(t) for t in self.tint)
        self.elevation = tuple(float(e) for e in self.elevation)
        if self.views < 2:
            raise ConfigError(f"need at least 2 views, got {self.views}")
        if self.width < 2 or self.height < 2 or self.width % 2 or self.height % 2:
            raise ConfigError(f"image size must be even and >= 2, got {self.width}x{self.height}")
        if self.gt_samples < 128:
            raise ConfigError(f"ground truth needs >= 128 samples per ray, got {self.gt_samples}")
        if self.radius <= SQRT3:
            raise ConfigError(f"orbit radius must exceed the scene half-diagonal {SQRT3:.3f}")
        if self.test_every < 0:
            raise ConfigError("test_every must be >= 0 (0 disables the held-out split)")
        if not self.black_level < self.white_level:
            raise ConfigError("black_level must be below white_level")
        # validates dim/tint/noise
        self.degradation

    @property
    def degradation(self) -> Degradation:
        return Degradation(self.dim, self.tint, self.beta, self.delta)

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "SynthesizeConfig":
        check_known_keys("synthesize", values, cls.__dataclass_fields__)
        return cls(**values)

    @classmethod
    def from_config(cls) -> "SynthesizeConfig":
        return cls.from_dict(get_config_manager().get_section("synthesize"))

    def to_dict(self) -> Dict[str, Any]:
        values = asdict(self)
        values["tint"] = list(self.tint)
        values["elevation"] = list(self.elevation)
        return values


def resolve_scene(name: str) -> Tuple[List[Primitive], Dict[str, Any]]:
    """A preset name or the path of a JSON/TOML scene description."""
    if name in PRESETS:
        return get_preset(name), {}
    path = Path(name)
    if path.suffix in (".json", ".toml"):
        return load_scene_spec(path)
    return get_preset(name), {}


def _render_view(
    scene: SyntheticScene, manifest: DatasetManifest, index: int, n_samples: int
) -> LinearRGBImage:
    view = manifest.views[index]
    rays = camera_rays(
        view.pose_matrix, view.intrinsics, manifest.height, manifest.width, manifest.near, manifest.far
    )
    sample = sample_stratified(rays, n_samples, jitter=False)
    sigma, albedo = scene.query(sample.points.reshape(-1, 3))
    sigma = sigma.reshape(sample.t_values.shape)
    albedo = albedo.reshape(sample.t_values.shape + (3,))
    weights, _ = quadrature_weights(sigma, sample.deltas)
    colors = np.sum(weights[..., None] * albedo, axis=1)
    return LinearRGBImage(np.clip(colors, 0.0, 1.0).reshape(manifest.height, manifest.width, 3))


def render_ground_truth(
    scene: SyntheticScene, manifest: DatasetManifest, n_samples: int = 192
) -> List[LinearRGBImage]:
    """
    Clean renders of every view from the oracle density and albedo.

    Uses deterministic midpoint sampling; views render in parallel and come
    back in manifest order.
    """
    if n_samples < 128:
        raise ValueError(f"ground truth needs >= 128 samples per ray, got {n_samples}")
    with ThreadPoolExecutor(max_workers=get_thread_count(), thread_name_prefix="GroundTruth") as pool:
        futures = [
            pool.submit(_render_view, scene, manifest, i, n_samples) for i in range(manifest.n_views)
        ]
        return [f.result() for f in futures]


def degrade(
    clean: Union[LinearRGBImage, np.ndarray],
    degradation: Degradation,
    rng: Optional[np.random.Generator] = None,
) -> RawImage:
    """
    Turn a clean linear image into a low-light raw observation.

    low = clean * (dim * tint), mosaicked RGGB, then heteroscedastic noise.

    Returns:
        Normalized RawImage (black 0, white 1) recording the noise model
    """
    pixels = clean.pixels if isinstance(clean, LinearRGBImage) else np.asarray(clean, dtype=np.float64)
    if np.any(pixels < 0.0) or np.any(pixels > 1.0):
        raise ValueError("clean image must lie in [0, 1]")
    low = mosaic(pixels * degradation.gains)
    return add_noise(low, degradation.beta, degradation.delta, rng)


def _view_paths(index: int) -> Tuple[str, str]:
    return (f"raw/view_{index:03d}.lfrw", f"gt/view_{index:03d}.npy")


def write_dataset(
    out_dir: Union[str, Path],
    manifest: DatasetManifest,
    raws: Sequence[RawImage],
    cleans: Sequence[Union[LinearRGBImage, np.ndarray]],
) -> None:
    """
    Write raws (LFRW, sensor levels), clean GT (.npy float64) and the manifest.

    The manifest is written last, once every view is on disk.
    """
    out = Path(out_dir)
    if len(raws) != manifest.n_views or len(cleans) != manifest.n_views:
        raise DatasetError("raws and ground truth must match the manifest's view count")
    (out / "raw").mkdir(parents=True, exist_ok=True)
    (out / "gt").mkdir(parents=True, exist_ok=True)
    for view, raw, clean in zip(manifest.views, raws, cleans):
        stored = raw
        if raw.is_normalized:
            stored = encode_sensor_levels(raw, manifest.black_level, manifest.white_level)
        write_raw(out / view.raw_path, stored)
        pixels = clean.pixels if isinstance(clean, LinearRGBImage) else np.asarray(clean)
        np.save(out / view.gt_path, pixels.astype(np.float64))
    manifest.write(out / MANIFEST_NAME)


def synthesize_dataset(
    cfg: SynthesizeConfig,
    out_dir: Union[str, Path],
    primitives: Optional[Sequence[Primitive]] = None,
) -> DatasetManifest:
    """
    Generate and write a complete dataset.

    Args:
        cfg: Generation settings
        out_dir: Destination directory
        primitives: Scene override; defaults to ``cfg.scene``

    Returns:
        The written manifest
    """
    extra: Dict[str, Any] = {"resolution": cfg.resolution}
    if primitives is None:
        primitives, overrides = resolve_scene(cfg.scene)
        extra.update(overrides)
    scene = build_scene(primitives, **extra)

    poses = generate_poses(cfg.views, cfg.radius, cfg.elevation, np.random.default_rng(cfg.seed))
    fx, fy, cx, cy = intrinsics_for(cfg.width, cfg.height, cfg.fov)
    views = []
    for i, pose in enumerate(poses):
        raw_path, gt_path = _view_paths(i)
        held_out = cfg.test_every > 0 and (i + 1) % cfg.test_every == 0
        views.append(
            ViewRecord(
                pose=[float(v) for v in pose.reshape(-1)],
                fx=fx,
                fy=fy,
                cx=cx,
                cy=cy,
                raw_path=raw_path,
                gt_path=gt_path,
                split="test" if held_out else "train",
            )
        )
    degradation = cfg.degradation
    manifest = DatasetManifest(
        width=cfg.width,
        height=cfg.height,
        near=cfg.radius - SQRT3,
        far=cfg.radius + SQRT3,
        degradation=degradation,
        views=views,
        seed=cfg.seed,
        scene=cfg.scene,
        nominal_lux=cfg.dim,
        black_level=cfg.black_level,
        white_level=cfg.white_level,
    )

    logger.info("rendering %d ground-truth views at %dx%d", cfg.views, cfg.width, cfg.height)
    cleans = render_ground_truth(scene, manifest, cfg.gt_samples)
    # one stream per view keeps draws independent of worker scheduling
    raws = [
        degrade(clean, degradation, np.random.default_rng([cfg.seed, i]))
        for i, clean in enumerate(cleans)
    ]
    write_dataset(out_dir, manifest, raws, cleans)
    logger.info(
        "wrote %d views (%d held out) to %s", manifest.n_views, len(manifest.test_indices), out_dir
    )
    return manifest


@dataclass
class LowLightDataset:
    """Read access to a dataset directory with per-view caching."""

    root: Path
    manifest: DatasetManifest
    _observed: Dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    @classmethod
    def open(cls, root: Union[str, Path]) -> "LowLightDataset":
        root = Path(root)
        if not root.is_dir():
            raise DatasetError(f"dataset directory not found: {root}")
        return cls(root=root, manifest=DatasetManifest.read(root / MANIFEST_NAME))

    def raw(self, index: int) -> RawImage:
        return read_raw(self.root / self.manifest.views[index].raw_path)

    def observed(self, index: int) -> np.ndarray:
        """Black-level-subtracted, demosaiced observation of a view, (H, W, 3)."""
        if index not in self._observed:
            normalized = subtract_black_level(self.raw(index))
            if normalized.mosaic.shape != (self.manifest.height, self.manifest.width):
                raise DatasetError(f"view {index}: raw size does not match the manifest")
            self._observed[index] = demosaic_bilinear(normalized).pixels
        return self._observed[index]

    def ground_truth(self, index: int) -> np.ndarray:
        path = self.root / self.manifest.views[index].gt_path
        try:
            return np.load(path)
        except FileNotFoundError:
            raise DatasetError(f"ground truth file not found: {path}") from None


def read_dataset(root: Union[str, Path]) -> LowLightDataset:
    """Open a dataset directory written by :func:`write_dataset`."""
    return LowLightDataset.open(root)


def rescale_dataset(src: Union[str, Path], dst: Union[str, Path], gamma: float) -> DatasetManifest:
    """
    Copy a dataset with every raw rescaled by an exposure ratio.

    Raws are rescaled in the black-level-subtracted domain and re-encoded at
    the original sensor levels, saturating at white. Ground truth is copied.

    Returns:
        The manifest written to ``dst``
    """
    source = read_dataset(src)
    out = Path(dst)
    (out / "raw").mkdir(parents=True, exist_ok=True)
    (out / "gt").mkdir(parents=True, exist_ok=True)
    manifest = source.manifest
    for i, view in enumerate(manifest.views):
        raw = source.raw(i)
        scaled = scale_exposure(subtract_black_level(raw), gamma)
        write_raw(out / view.raw_path, encode_sensor_levels(scaled, raw.black_level, raw.white_level))
        shutil.copyfile(source.root / view.gt_path, out / view.gt_path)
    rescaled = replace(manifest, exposure_ratio=manifest.exposure_ratio * gamma)
    rescaled.write(out / MANIFEST_NAME)
    logger.info("rescaled %s by %.3g into %s", src, gamma, dst)
    return rescaled
