"""End-to-end orchestration: manifests, training, fused classification, reports.

Manifest entries are canonically sorted by (label, content digest) before
anything is trained, so entry order in the manifest file cannot influence
any result. Stages that draw random numbers per query are seeded from the
global seed XOR the query image's digest for the same reason.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import ann as ann_mod
from . import gknn as gknn_mod
from . import svm as svm_mod
from .dataset import CLASS_CATALOG, LabeledSet, load_manifest, one_hot
from .errors import FinspectError, ParameterError
from .features import FeatureVector, MomentProductSpec, cmi_features, elm_features, gfd_features
from .fusion import DecisionTemplates, compute_templates, fuse, two_stage_fuse
from .preprocess import segment_image
from .raster import GrayImage, GrayscaleCoefficients, decode_image, to_grayscale

EXTRACTORS = ("cmi", "gfd", "elm")
CLASSIFIERS = ("ann", "gknn", "svm")

_STD_FLOOR = 1e-12


@dataclass(frozen=True)
class PipelineConfig:
    grayscale: GrayscaleCoefficients = field(default_factory=GrayscaleCoefficients)
    median_window: int = 3
    gfd_radial: int = 4
    gfd_angular: int = 9
    elm_max_order: int = 5
    cmi_basis: tuple | None = None
    ann_hidden: int = 16
    ann_beta: float = 0.5
    ann_epochs: int = 200
    gknn_k: int = 3
    svm_a: float = 1.0
    svm_tol: float = 1e-3
    svm_max_iter: int = 1000
    extractors: tuple[str, ...] = EXTRACTORS
    classifiers: tuple[str, ...] = CLASSIFIERS

    def validate(self):
        if not self.extractors or any(e not in EXTRACTORS for e in self.extractors):
            raise ParameterError(f"extractors must be a nonempty subset of {EXTRACTORS}")
        if not self.classifiers or any(c not in CLASSIFIERS for c in self.classifiers):
            raise ParameterError(f"classifiers must be a nonempty subset of {CLASSIFIERS}")

    @staticmethod
    def from_dict(doc: dict) -> "PipelineConfig":
        cfg = PipelineConfig()
        if "grayscale" in doc:
            g = doc["grayscale"]
            cfg = replace(cfg, grayscale=GrayscaleCoefficients(
                g.get("alpha", 0.299), g.get("beta", 0.587),
                g.get("gamma", 0.114), g.get("mu", 255)))
        if "median_window" in doc:
            cfg = replace(cfg, median_window=int(doc["median_window"]))
        if "gfd" in doc:
            cfg = replace(cfg, gfd_radial=int(doc["gfd"].get("radial", cfg.gfd_radial)),
                          gfd_angular=int(doc["gfd"].get("angular", cfg.gfd_angular)))
        if "elm" in doc:
            cfg = replace(cfg, elm_max_order=int(doc["elm"].get("max_order", cfg.elm_max_order)))
        if "cmi" in doc and doc["cmi"].get("basis") is not None:
            basis = tuple(MomentProductSpec(tuple(tuple(f) for f in spec))
                          for spec in doc["cmi"]["basis"])
            cfg = replace(cfg, cmi_basis=basis)
        if "ann" in doc:
            a = doc["ann"]
            cfg = replace(cfg, ann_hidden=int(a.get("hidden", cfg.ann_hidden)),
                          ann_beta=float(a.get("beta", cfg.ann_beta)),
                          ann_epochs=int(a.get("epochs", cfg.ann_epochs)))
        if "gknn" in doc:
            cfg = replace(cfg, gknn_k=int(doc["gknn"].get("k", cfg.gknn_k)))
        if "svm" in doc:
            s = doc["svm"]
            cfg = replace(cfg, svm_a=float(s.get("A", cfg.svm_a)),
                          svm_tol=float(s.get("tol", cfg.svm_tol)),
                          svm_max_iter=int(s.get("max_iter", cfg.svm_max_iter)))
        if "extractors" in doc:
            cfg = replace(cfg, extractors=tuple(doc["extractors"]))
        if "classifiers" in doc:
            cfg = replace(cfg, classifiers=tuple(doc["classifiers"]))
        cfg.validate()
        cfg.grayscale.validate()
        return cfg

    def to_dict(self) -> dict:
        return {
            "grayscale": {"alpha": self.grayscale.alpha, "beta": self.grayscale.beta,
                          "gamma": self.grayscale.gamma, "mu": self.grayscale.mu},
            "median_window": self.median_window,
            "gfd": {"radial": self.gfd_radial, "angular": self.gfd_angular},
            "elm": {"max_order": self.elm_max_order},
            "cmi": {"basis": None if self.cmi_basis is None else
                    [[list(f) for f in spec.factors] for spec in self.cmi_basis]},
            "ann": {"hidden": self.ann_hidden, "beta": self.ann_beta, "epochs": self.ann_epochs},
            "gknn": {"k": self.gknn_k},
            "svm": {"A": self.svm_a, "tol": self.svm_tol, "max_iter": self.svm_max_iter},
            "extractors": list(self.extractors),
            "classifiers": list(self.classifiers),
        }


def load_config(path: str | Path | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    return PipelineConfig.from_dict(json.loads(Path(path).read_text()))


def content_digest(raw: bytes) -> int:
    return int.from_bytes(hashlib.sha256(raw).digest()[:8], "big")


def load_gray(raw: bytes, config: PipelineConfig) -> GrayImage:
    img = decode_image(raw)
    if isinstance(img, GrayImage):
        return img
    return to_grayscale(img, config.grayscale)


def largest_shape(img: GrayImage, config: PipelineConfig) -> GrayImage:
    """Segment and return the biggest foreground shape's masked crop."""
    seg, fg_labels = segment_image(img, median_side=config.median_window)
    crops = [seg.shapes[i] for i in fg_labels]
    return max(crops, key=lambda c: c.pixel_count).image


def extract_one(img: GrayImage, extractor: str, config: PipelineConfig) -> FeatureVector:
    if extractor == "cmi":
        return cmi_features(img.pixels, basis=config.cmi_basis)
    if extractor == "gfd":
        return gfd_features(img.pixels, radial_count=config.gfd_radial,
                            angular_count=config.gfd_angular)
    if extractor == "elm":
        return elm_features(img.pixels, max_order=config.elm_max_order)
    raise ParameterError(f"unknown extractor {extractor!r}")


@dataclass(frozen=True)
class PipelineModels:
    class_names: tuple[str, ...]
    config: PipelineConfig
    seed: int
    scalers: dict          # extractor -> (mean, std) arrays
    ann_models: dict       # extractor -> MlpModel
    svm_models: dict       # extractor -> SvmModel
    gknn_sets: dict        # extractor -> LabeledSet (standardized)
    stage1_templates: dict  # extractor -> DecisionTemplates
    stage2_templates: DecisionTemplates


def _standardize(rows: np.ndarray):
    mean = rows.mean(axis=0)
    std = rows.std(axis=0)
    std = np.where(std < _STD_FLOOR, 1.0, std)
    return (rows - mean) / std, mean, std


def _profile_for(models: PipelineModels, feats: dict, digest: int, extractor: str) -> np.ndarray:
    x = feats[extractor]
    rows = []
    for clf in models.config.classifiers:
        if clf == "ann":
            rows.append(ann_mod.predict_proba(models.ann_models[extractor], x)[0])
        elif clf == "gknn":
            rows.append(gknn_mod.gknn_classify(x, models.gknn_sets[extractor],
                                               models.config.gknn_k,
                                               rng_seed=models.seed ^ digest))
        else:
            rows.append(svm_mod.predict_proba(models.svm_models[extractor], x))
    return np.stack(rows)


def _scaled_features(models: PipelineModels, img: GrayImage) -> dict:
    out = {}
    for ext in models.config.extractors:
        mean, std = models.scalers[ext]
        out[ext] = (extract_one(img, ext, models.config).values - mean) / std
    return out


@dataclass
class _Entry:
    path: str
    label: str
    digest: int
    hexdigest: str
    image: GrayImage | None = None
    features: dict | None = None


def _prepare_entries(entries, config, base_dir, failures):
    prepared = []
    for item in entries:
        path = Path(base_dir) / item["path"] if base_dir else Path(item["path"])
        try:
            raw = path.read_bytes()
        except OSError as exc:
            failures.append({"path": item["path"], "stage": "read", "error": str(exc)})
            continue
        ent = _Entry(item["path"], item["label"], content_digest(raw),
                     hashlib.sha256(raw).hexdigest())
        try:
            gray = load_gray(raw, config)
            ent.image = largest_shape(gray, config)
            ent.features = {ext: extract_one(ent.image, ext, config).values
                            for ext in config.extractors}
        except FinspectError as exc:
            failures.append({"path": item["path"], "stage": "preprocess", "error": str(exc)})
            continue
        prepared.append(ent)
    prepared.sort(key=lambda e: (e.label, e.hexdigest))
    return prepared


def train_models(manifest_entries, config: PipelineConfig, seed: int = 0,
                 base_dir: str | Path | None = None):
    """Fit all enabled classifiers plus fusion templates.

    Returns (PipelineModels, prepared entries, failures).
    """
    config.validate()
    failures: list[dict] = []
    prepared = _prepare_entries(manifest_entries, config, base_dir, failures)
    if not prepared:
        raise ParameterError("no manifest entry survived preprocessing")
    class_names = tuple(c for c in CLASS_CATALOG if any(e.label == c for e in prepared))
    for ent in prepared:
        if ent.label not in class_names:
            raise ParameterError(f"label {ent.label!r} not in catalog")
    if len(class_names) < 2:
        raise ParameterError("training needs at least 2 classes present")
    labels = np.array([class_names.index(e.label) for e in prepared])
    targets = one_hot(labels, len(class_names))

    scalers, ann_models, svm_models, gknn_sets = {}, {}, {}, {}
    for ext in config.extractors:
        rows = np.stack([e.features[ext] for e in prepared])
        scaled, mean, std = _standardize(rows)
        scalers[ext] = (mean, std)
        data = LabeledSet(scaled, targets, class_names)
        ann_models[ext] = ann_mod.train(data, ann_mod.TrainConfig(
            hidden=config.ann_hidden, learning_rate=config.ann_beta,
            epochs=config.ann_epochs, rng_seed=seed))
        svm_models[ext] = svm_mod.train_svm(data, regularization=config.svm_a,
                                            tol=config.svm_tol, max_iter=config.svm_max_iter)
        gknn_sets[ext] = data

    models = PipelineModels(class_names, config, seed, scalers, ann_models,
                            svm_models, gknn_sets, {}, None)

    # resubstitution decision profiles feed both template stages
    stage1_profiles = {ext: [] for ext in config.extractors}
    for ent in prepared:
        feats = _scaled_features(models, ent.image)
        for ext in config.extractors:
            stage1_profiles[ext].append(_profile_for(models, feats, ent.digest, ext))
    stage1_templates = {ext: compute_templates(stage1_profiles[ext], labels, len(class_names))
                        for ext in config.extractors}
    models = replace(models, stage1_templates=stage1_templates)

    stage2_profiles = []
    for idx in range(len(prepared)):
        rows = [fuse(stage1_profiles[ext][idx], stage1_templates[ext]).support
                for ext in config.extractors]
        stage2_profiles.append(np.stack(rows))
    stage2_templates = compute_templates(stage2_profiles, labels, len(class_names))
    models = replace(models, stage2_templates=stage2_templates)
    return models, prepared, failures


def classify_image(models: PipelineModels, img: GrayImage, digest: int):
    """Two-stage fused decision for one already-cropped shape image.

    Returns (final ClassSupport, stage1 supports, per-pair argmax dict).
    """
    feats = _scaled_features(models, img)
    profiles = [_profile_for(models, feats, digest, ext) for ext in models.config.extractors]
    per_pair = {}
    for ext, profile in zip(models.config.extractors, profiles):
        for row, clf in zip(profile, models.config.classifiers):
            per_pair[(ext, clf)] = int(np.argmax(row))
    final, stage1 = two_stage_fuse(profiles,
                                   [models.stage1_templates[ext]
                                    for ext in models.config.extractors],
                                   models.stage2_templates)
    return final, stage1, per_pair


def classify_segments(models: PipelineModels, img: GrayImage, digest: int) -> list[dict]:
    """Classify every foreground shape of a composite image separately."""
    seg, fg_labels = segment_image(img, median_side=models.config.median_window)
    out = []
    for i in sorted(fg_labels, key=lambda i: -seg.shapes[i].pixel_count):
        final, _, _ = classify_image(models, seg.shapes[i].image, digest ^ i)
        out.append({"shape": i, "bbox": list(seg.shapes[i].bbox),
                    "predicted": models.class_names[final.predicted],
                    "support": final.support.tolist()})
    return out


def run_pipeline(manifest_entries, config: PipelineConfig | None = None, seed: int = 0,
                 base_dir: str | Path | None = None):
    """Train on the manifest and evaluate by resubstitution.

    Returns (PipelineModels, report dict).
    """
    config = config or PipelineConfig()
    models, prepared, failures = train_models(manifest_entries, config, seed, base_dir)
    k = len(models.class_names)
    exts, clfs = config.extractors, config.classifiers

    pair_confusion = {ext: {clf: np.zeros((k, k), dtype=int) for clf in clfs} for ext in exts}
    stage1_hits = {ext: 0 for ext in exts}
    final_confusion = np.zeros((k, k), dtype=int)
    predictions = []
    for ent in prepared:
        truth = models.class_names.index(ent.label)
        final, stage1, per_pair = classify_image(models, ent.image, ent.digest)
        for (ext, clf), pred in per_pair.items():
            pair_confusion[ext][clf][truth, pred] += 1
        for ext, sup in zip(exts, stage1):
            stage1_hits[ext] += int(sup.predicted == truth)
        final_confusion[truth, final.predicted] += 1
        predictions.append({"path": ent.path, "label": ent.label,
                            "predicted": models.class_names[final.predicted],
                            "support": [float(f"{v:.17g}") for v in final.support]})

    n = len(prepared)
    per_class = {}
    for j, name in enumerate(models.class_names):
        count = int(final_confusion[j].sum())
        fn = count - int(final_confusion[j, j])
        fp = int(final_confusion[:, j].sum()) - int(final_confusion[j, j])
        per_class[name] = {
            "false_negative_rate": fn / count if count else 0.0,
            "false_positive_rate": fp / (n - count) if n - count else 0.0,
        }
    report = {
        "class_names": list(models.class_names),
        "n_images": n,
        "failures": failures,
        "per_pair_confusion": {ext: {clf: pair_confusion[ext][clf].tolist() for clf in clfs}
                               for ext in exts},
        "per_extractor_fused_accuracy": {ext: stage1_hits[ext] / n for ext in exts},
        "final_accuracy": float(np.trace(final_confusion)) / n,
        "final_confusion": final_confusion.tolist(),
        "per_class_rates": per_class,
        "predictions": predictions,
        "seed": seed,
        "config": config.to_dict(),
    }
    return models, report


def run_pipeline_from_manifest(manifest_path: str | Path, config=None, seed: int = 0):
    entries = load_manifest(manifest_path)
    return run_pipeline(entries, config, seed, base_dir=Path(manifest_path).parent)


def _templates_to_dict(t: DecisionTemplates) -> dict:
    return {"matrices": t.matrices.tolist(), "counts": t.counts.tolist()}


def _templates_from_dict(doc: dict) -> DecisionTemplates:
    return DecisionTemplates(np.asarray(doc["matrices"]), np.asarray(doc["counts"]))


def save_models(models: PipelineModels, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    meta = {
        "class_names": list(models.class_names),
        "seed": models.seed,
        "config": models.config.to_dict(),
        "scalers": {ext: {"mean": m.tolist(), "std": s.tolist()}
                    for ext, (m, s) in models.scalers.items()},
        "stage1_templates": {ext: _templates_to_dict(t)
                             for ext, t in models.stage1_templates.items()},
        "stage2_templates": _templates_to_dict(models.stage2_templates),
        "gknn": {ext: {"inputs": d.inputs.tolist(), "targets": d.targets.tolist()}
                 for ext, d in models.gknn_sets.items()},
    }
    (directory / "pipeline.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    for ext, model in models.ann_models.items():
        ann_mod.save_model(model, directory / f"ann_{ext}.json")
    for ext, model in models.svm_models.items():
        svm_mod.save_model(model, directory / f"svm_{ext}.json")


def load_models(directory: str | Path) -> PipelineModels:
    directory = Path(directory)
    meta = json.loads((directory / "pipeline.json").read_text())
    config = PipelineConfig.from_dict(meta["config"])
    class_names = tuple(meta["class_names"])
    scalers = {ext: (np.asarray(doc["mean"]), np.asarray(doc["std"]))
               for ext, doc in meta["scalers"].items()}
    gknn_sets = {ext: LabeledSet(np.asarray(doc["inputs"]), np.asarray(doc["targets"]),
                                 class_names)
                 for ext, doc in meta["gknn"].items()}
    ann_models = {ext: ann_mod.load_model(directory / f"ann_{ext}.json")
                  for ext in config.extractors}
    svm_models = {ext: svm_mod.load_model(directory / f"svm_{ext}.json")
                  for ext in config.extractors}
    return PipelineModels(
        class_names, config, meta["seed"], scalers, ann_models, svm_models, gknn_sets,
        {ext: _templates_from_dict(doc) for ext, doc in meta["stage1_templates"].items()},
        _templates_from_dict(meta["stage2_templates"]))
