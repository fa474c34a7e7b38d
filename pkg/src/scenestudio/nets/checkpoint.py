"""Deterministic checkpoint container for generator/discriminator weights.

Layout: an 8-byte magic, a little-endian uint64 header length, a canonical
JSON header (specs, metadata, array directory), then the raw array payloads
in directory order. No timestamps or environment data are written, so saving
the same weights twice produces byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from ..errors import CheckpointError
from .discriminator import DiscriminatorPyramid
from .generator import SceneGenerator
from .specs import DiscriminatorSpec, GeneratorSpec, spec_hash, specs_from_json

_MAGIC = b"SSCKPT01"
_FORMAT_VERSION = 1


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass
class CheckpointBundle:
    gen_spec: GeneratorSpec
    disc_spec: DiscriminatorSpec
    arrays: dict[str, np.ndarray]
    meta: dict = field(default_factory=dict)


def _collect_arrays(generator: SceneGenerator,
                    discriminators: DiscriminatorPyramid | None) -> dict[str, np.ndarray]:
    arrays: dict[str, np.ndarray] = {}
    for name, tensor in generator.state_dict().items():
        arrays[f"generator.{name}"] = tensor.detach().cpu().numpy()
    if discriminators is not None:
        for name, tensor in discriminators.state_dict().items():
            arrays[f"discriminators.{name}"] = tensor.detach().cpu().numpy()
    return arrays


def write_bundle(path: str | Path, bundle: CheckpointBundle) -> None:
    spec_payload = json.loads(
        _canonical({"generator": bundle.gen_spec.__dict__,
                    "discriminator": bundle.disc_spec.__dict__}))
    directory = []
    blobs = []
    for name in sorted(bundle.arrays):
        arr = np.ascontiguousarray(bundle.arrays[name])
        directory.append({"name": name, "dtype": arr.dtype.str, "shape": list(arr.shape)})
        blobs.append(arr.tobytes())
    header = _canonical({
        "format_version": _FORMAT_VERSION,
        "spec": spec_payload,
        "spec_hash": spec_hash(bundle.gen_spec, bundle.disc_spec),
        "meta": bundle.meta,
        "arrays": directory,
    }).encode()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        for blob in blobs:
            fh.write(blob)


def save_checkpoint(path: str | Path, generator: SceneGenerator,
                    discriminators: DiscriminatorPyramid | None = None,
                    meta: dict | None = None) -> None:
    disc_spec = (discriminators.spec if discriminators is not None
                 else DiscriminatorSpec(num_attributes=generator.spec.num_attributes,
                                        layout_bits=generator.spec.layout_bits,
                                        scale_divisor=generator.spec.scale_divisor))
    bundle = CheckpointBundle(gen_spec=generator.spec, disc_spec=disc_spec,
                              arrays=_collect_arrays(generator, discriminators),
                              meta=meta or {})
    write_bundle(path, bundle)


def load_checkpoint(path: str | Path) -> CheckpointBundle:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if raw[:8] != _MAGIC:
        raise CheckpointError(f"{path} is not a scenestudio checkpoint")
    (header_len,) = struct.unpack("<Q", raw[8:16])
    try:
        header = json.loads(raw[16:16 + header_len])
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"corrupt checkpoint header in {path}") from exc
    if header.get("format_version") != _FORMAT_VERSION:
        raise CheckpointError(
            f"unsupported checkpoint format_version {header.get('format_version')!r}")
    gen_spec, disc_spec = specs_from_json(json.dumps(header["spec"]))
    if header["spec_hash"] != spec_hash(gen_spec, disc_spec):
        raise CheckpointError("spec hash mismatch: checkpoint header was altered")
    arrays = {}
    offset = 16 + header_len
    for entry in header["arrays"]:
        dtype = np.dtype(entry["dtype"])
        shape = tuple(entry["shape"])
        nbytes = dtype.itemsize * int(np.prod(shape, dtype=np.int64)) if shape else dtype.itemsize
        blob = raw[offset:offset + nbytes]
        if len(blob) != nbytes:
            raise CheckpointError(f"checkpoint truncated at array {entry['name']!r}")
        arrays[entry["name"]] = np.frombuffer(blob, dtype=dtype).reshape(shape).copy()
        offset += nbytes
    if offset != len(raw):
        raise CheckpointError("checkpoint has trailing bytes beyond the array directory")
    return CheckpointBundle(gen_spec=gen_spec, disc_spec=disc_spec,
                            arrays=arrays, meta=header.get("meta", {}))


def _load_prefixed(module: torch.nn.Module, arrays: dict[str, np.ndarray], prefix: str) -> None:
    state = {}
    for key, tensor in module.state_dict().items():
        name = f"{prefix}.{key}"
        if name not in arrays:
            raise CheckpointError(f"checkpoint is missing parameter {name!r}")
        arr = arrays[name]
        if tuple(arr.shape) != tuple(tensor.shape):
            raise CheckpointError(
                f"parameter {name!r} has shape {tuple(arr.shape)}, "
                f"module expects {tuple(tensor.shape)}")
        state[key] = torch.from_numpy(arr)
    module.load_state_dict(state)


def restore_generator(bundle: CheckpointBundle,
                      expected_spec: GeneratorSpec | None = None) -> SceneGenerator:
    if expected_spec is not None and expected_spec != bundle.gen_spec:
        raise CheckpointError("checkpoint generator spec does not match the expected spec")
    gen = SceneGenerator(bundle.gen_spec)
    _load_prefixed(gen, bundle.arrays, "generator")
    gen.eval()
    return gen


def restore_discriminators(bundle: CheckpointBundle) -> DiscriminatorPyramid | None:
    if not any(k.startswith("discriminators.") for k in bundle.arrays):
        return None
    disc = DiscriminatorPyramid(bundle.disc_spec)
    _load_prefixed(disc, bundle.arrays, "discriminators")
    return disc


def checkpoint_file_hash(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
