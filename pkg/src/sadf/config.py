"""Key-value config files and the run-config snapshot embedded in artifacts.

Config files are plain ``key = value`` lines; ``#`` starts a comment. The
encoder keys follow the documented scheme::

    encode.<feature> = onehot|hash:<n>|standardize|passthrough|drop
    encode.unknown   = zero|hash
    encode.seed      = <u64>

Command-line flags always win over file values.
"""

from __future__ import annotations

from pathlib import Path

from .encoding import EncoderConfig, default_config
from .schema import DatasetSchema


def parse_kv_file(path: str | Path) -> dict[str, str]:
    """Parse a key = value file; later duplicates override earlier ones."""
    options: dict[str, str] = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{line_no}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        options[key.strip()] = value.strip()
    return options


def merge_options(file_options: dict[str, str], flag_options: dict[str, str]) -> dict[str, str]:
    merged = dict(file_options)
    merged.update({k: v for k, v in flag_options.items() if v is not None})
    return merged


def encoder_config_from_options(
    options: dict[str, str], schema: DatasetSchema, seed: int = 0
) -> EncoderConfig:
    """Build an encoder config: the default profile plus encode.* overrides."""
    seed = int(options.get("encode.seed", seed))
    unknown = options.get("encode.unknown", "zero")
    base = default_config(schema, seed=seed)
    policies = dict(base.policies)
    for key, value in options.items():
        if not key.startswith("encode.") or key in ("encode.seed", "encode.unknown"):
            continue
        feature = key[len("encode."):]
        if feature not in policies:
            raise ValueError(f"encode.{feature}: unknown feature for {schema.dataset_id}")
        policies[feature] = value
    return EncoderConfig(policies=policies, unknown=unknown, seed=seed)


def parse_int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def parse_str_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]
