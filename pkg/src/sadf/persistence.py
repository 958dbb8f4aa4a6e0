"""Versioned binary persistence for models and encoders.

Both artifact kinds share one container: a 4-byte magic, a version byte,
then length-prefixed named sections::

    [u8 name_len][name utf-8][u64 le payload_len][payload]

Scalars and layout travel as canonical JSON (sorted keys), numpy arrays as
raw little-endian bytes described by a JSON manifest, so identical inputs
produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .encoding import EncoderConfig, FlowEncoder
from .errors import ArtifactFormatError
from .models import MODEL_REGISTRY, model_id_of
from .models.tree import DecisionTree
from .schema import load_schema

MODEL_MAGIC = b"SADM"
ENCODER_MAGIC = b"SADE"
FORMAT_VERSION = 1

_TREE_ARRAYS = (
    "feature_", "threshold_", "children_left_", "children_right_", "leaf_class_", "value_",
)


def _canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _write_container(path: Path, magic: bytes, sections: list[tuple[str, bytes]]) -> None:
    with open(path, "wb") as fh:
        fh.write(magic)
        fh.write(bytes([FORMAT_VERSION]))
        for name, payload in sections:
            encoded = name.encode("utf-8")
            fh.write(bytes([len(encoded)]))
            fh.write(encoded)
            fh.write(len(payload).to_bytes(8, "little"))
            fh.write(payload)


def _read_container(path: Path, magic: bytes) -> dict[str, bytes]:
    data = Path(path).read_bytes()
    if len(data) < 5 or data[:4] != magic:
        raise ArtifactFormatError(f"{path}: bad magic, not a {magic.decode()} artifact")
    if data[4] != FORMAT_VERSION:
        raise ArtifactFormatError(f"{path}: unsupported format version {data[4]}")
    sections: dict[str, bytes] = {}
    pos = 5
    while pos < len(data):
        name_len = data[pos]
        pos += 1
        name = data[pos : pos + name_len].decode("utf-8")
        pos += name_len
        payload_len = int.from_bytes(data[pos : pos + 8], "little")
        pos += 8
        payload = data[pos : pos + payload_len]
        if len(payload) != payload_len:
            raise ArtifactFormatError(f"{path}: truncated section {name!r}")
        pos += payload_len
        sections[name] = payload
    return sections


def _pack_arrays(arrays: dict[str, np.ndarray]) -> tuple[bytes, list[tuple[str, bytes]]]:
    manifest = {}
    sections = []
    for name, arr in arrays.items():
        arr = np.ascontiguousarray(arr)
        manifest[name] = {"dtype": arr.dtype.str, "shape": list(arr.shape)}
        sections.append((f"arr:{name}", arr.tobytes()))
    return _canonical_json(manifest), sections


def _unpack_arrays(sections: dict[str, bytes]) -> dict[str, np.ndarray]:
    manifest = json.loads(sections["manifest"])
    arrays = {}
    for name, info in manifest.items():
        raw = sections[f"arr:{name}"]
        arrays[name] = np.frombuffer(raw, dtype=np.dtype(info["dtype"])).reshape(info["shape"]).copy()
    return arrays


def _tree_arrays(tree: DecisionTree, prefix: str = "") -> dict[str, np.ndarray]:
    return {f"{prefix}{name}": getattr(tree, name) for name in _TREE_ARRAYS}


def _restore_tree(params: dict, arrays: dict[str, np.ndarray], prefix: str = "") -> DecisionTree:
    tree = DecisionTree(
        max_depth=params["max_depth"], min_leaf=params["min_leaf"],
        mtry=params.get("mtry"), random_state=params.get("random_state"),
    )
    for name in _TREE_ARRAYS:
        setattr(tree, name, arrays[f"{prefix}{name}"])
    tree.n_nodes_ = len(tree.feature_)
    tree.n_features_in_ = params["n_features_in"]
    return tree


def save_model(model, path: str | Path, run_config: dict | None = None) -> None:
    """Persist a fitted classifier to a tagged binary file."""
    model_id = model_id_of(model)
    params = {k: v for k, v in model.get_params().items()}
    extra: dict = {"n_features_in": int(model.n_features_in_)}
    arrays: dict[str, np.ndarray] = {}
    if model_id == "nb":
        extra["single_class"] = bool(model.single_class_)
        arrays = {"means_": model.means_, "sigmas_": model.sigmas_, "priors_": model.priors_}
    elif model_id == "dt":
        arrays = _tree_arrays(model)
    elif model_id == "rf":
        extra["mtry_fitted"] = int(model.mtry_)
        extra["n_fitted_trees"] = len(model.trees_)
        for i, tree in enumerate(model.trees_):
            arrays.update(_tree_arrays(tree, prefix=f"t{i}."))
    elif model_id == "svm":
        extra["bias"] = float(model.bias_)
        arrays = {"weights_": model.weights_,
                  "objective_history_": np.asarray(model.objective_history_, dtype=np.float64)}
    elif model_id == "knn":
        arrays = {"X_": model.X_, "y_": model.y_}
    manifest, array_sections = _pack_arrays(arrays)
    sections = [
        ("tag", model_id.encode("utf-8")),
        ("params", _canonical_json(params)),
        ("extra", _canonical_json(extra)),
        ("manifest", manifest),
        *array_sections,
    ]
    if run_config is not None:
        sections.append(("run_config", _canonical_json(run_config)))
    _write_container(Path(path), MODEL_MAGIC, sections)


def load_model(path: str | Path):
    """Load a classifier persisted by :func:`save_model`."""
    sections = _read_container(Path(path), MODEL_MAGIC)
    model_id = sections["tag"].decode("utf-8")
    if model_id not in MODEL_REGISTRY:
        raise ArtifactFormatError(f"{path}: unknown model tag {model_id!r}")
    params = json.loads(sections["params"])
    extra = json.loads(sections["extra"])
    arrays = _unpack_arrays(sections)
    n_features = extra.get("n_features_in", params.get("n_features_in"))

    if model_id == "dt":
        tree_params = dict(params)
        tree_params["n_features_in"] = n_features
        return _restore_tree(tree_params, arrays)

    model = MODEL_REGISTRY[model_id](**{k: v for k, v in params.items()
                                        if k != "n_features_in"})
    model.n_features_in_ = n_features
    if model_id == "nb":
        model.means_ = arrays["means_"]
        model.sigmas_ = arrays["sigmas_"]
        model.priors_ = arrays["priors_"]
        with np.errstate(divide="ignore"):
            model.log_priors_ = np.log(model.priors_)
        model.single_class_ = bool(extra["single_class"])
        model.classes_ = np.array([0, 1])
    elif model_id == "rf":
        tree_params = {"max_depth": params["max_depth"], "min_leaf": params["min_leaf"],
                       "mtry": extra["mtry_fitted"], "n_features_in": n_features}
        model.trees_ = [
            _restore_tree(tree_params, arrays, prefix=f"t{i}.")
            for i in range(extra["n_fitted_trees"])
        ]
        model.mtry_ = extra["mtry_fitted"]
    elif model_id == "svm":
        model.weights_ = arrays["weights_"]
        model.bias_ = float(extra["bias"])
        model.objective_history_ = arrays["objective_history_"].tolist()
    elif model_id == "knn":
        model.X_ = arrays["X_"]
        model.y_ = arrays["y_"]
        model._sq_norms = (model.X_ * model.X_).sum(axis=1)
    return model


def saved_run_config(path: str | Path, magic: bytes = MODEL_MAGIC) -> dict | None:
    """Read back the run-config snapshot embedded in an artifact, if any."""
    sections = _read_container(Path(path), magic)
    if "run_config" not in sections:
        return None
    return json.loads(sections["run_config"])


def save_encoder(encoder: FlowEncoder, path: str | Path, run_config: dict | None = None) -> None:
    """Persist a fitted encoder: config, layout, vocabularies and stats."""
    meta = {
        "dataset_id": encoder.schema.dataset_id,
        "policies": dict(encoder.config_.policies),
        "unknown": encoder.config_.unknown,
        "seed": encoder.config_.seed,
        "strict": encoder.strict,
        "dimension": encoder.dimension_,
        "layout": [list(entry) for entry in encoder.layout_],
    }
    vocab = {name: list(values) for name, values in encoder.vocabularies_.items()}
    stats = {name: [mean, sigma] for name, (mean, sigma) in encoder.numeric_stats_.items()}
    sections = [
        ("meta", _canonical_json(meta)),
        ("vocab", _canonical_json(vocab)),
        ("stats", _canonical_json(stats)),
    ]
    if run_config is not None:
        sections.append(("run_config", _canonical_json(run_config)))
    _write_container(Path(path), ENCODER_MAGIC, sections)


def load_encoder(path: str | Path) -> FlowEncoder:
    """Load an encoder persisted by :func:`save_encoder`."""
    sections = _read_container(Path(path), ENCODER_MAGIC)
    meta = json.loads(sections["meta"])
    schema = load_schema(meta["dataset_id"])
    config = EncoderConfig(policies=meta["policies"], unknown=meta["unknown"],
                           seed=meta["seed"])
    encoder = FlowEncoder(schema=schema, config=config, strict=meta["strict"])
    encoder.config_ = config
    encoder.vocabularies_ = {
        name: tuple(values) for name, values in json.loads(sections["vocab"]).items()
    }
    encoder.numeric_stats_ = {
        name: (float(pair[0]), float(pair[1]))
        for name, pair in json.loads(sections["stats"]).items()
    }
    encoder.layout_ = tuple((name, int(a), int(b)) for name, a, b in meta["layout"])
    encoder.dimension_ = int(meta["dimension"])
    return encoder
