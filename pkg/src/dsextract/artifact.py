"""Versioned single-file model artifacts.

The file is a zip (readable with ``numpy.load``) holding ``meta.json`` and one
``.npy`` member per parameter array. Member timestamps are fixed so saving the
same model twice gives byte-identical files.
"""

from __future__ import annotations

import io
import json
import zipfile
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

FORMAT = "dsextract-model"
FORMAT_VERSION = 1
_EPOCH = (1980, 1, 1, 0, 0, 0)


class ArtifactError(Exception):
    """Unreadable artifact, wrong format version, or wrong model kind."""


@dataclass
class ModelArtifact:
    kind: str
    family: str
    hyper: dict
    vocab: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def save(self, path) -> None:
        header = {
            "format": FORMAT,
            "version": FORMAT_VERSION,
            "kind": self.kind,
            "family": self.family,
            "hyper": self.hyper,
            "vocab": self.vocab,
            "meta": self.meta,
            "params": sorted(self.params),
        }
        with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as zf:
            _write(zf, "meta.json", json.dumps(header, sort_keys=True, indent=1).encode("utf-8"))
            for name in sorted(self.params):
                buf = io.BytesIO()
                np.lib.format.write_array(buf, np.ascontiguousarray(self.params[name]), allow_pickle=False)
                _write(zf, f"{name}.npy", buf.getvalue())

    @classmethod
    def load(cls, path, kind: Optional[str] = None) -> "ModelArtifact":
        try:
            with zipfile.ZipFile(path) as zf:
                header = json.loads(zf.read("meta.json"))
                if header.get("format") != FORMAT:
                    raise ArtifactError(f"{path}: not a {FORMAT} file")
                if header.get("version") != FORMAT_VERSION:
                    raise ArtifactError(
                        f"{path}: format version {header.get('version')} unsupported (expected {FORMAT_VERSION})"
                    )
                params = {
                    name: np.lib.format.read_array(io.BytesIO(zf.read(f"{name}.npy")), allow_pickle=False)
                    for name in header["params"]
                }
        except (zipfile.BadZipFile, KeyError, json.JSONDecodeError, OSError) as exc:
            raise ArtifactError(f"{path}: unreadable model artifact ({exc})") from None
        if kind is not None and header["kind"] != kind:
            raise ArtifactError(f"{path}: expected a {kind} model, found {header['kind']}")
        return cls(header["kind"], header["family"], header["hyper"], header["vocab"], params, header["meta"])


def _write(zf: zipfile.ZipFile, name: str, data: bytes) -> None:
    info = zipfile.ZipInfo(name, date_time=_EPOCH)
    info.compress_type = zipfile.ZIP_DEFLATED
    info.external_attr = 0o644 << 16
    zf.writestr(info, data)


def parse_hyper(art: ModelArtifact, parse):
    """Rebuild a hyperparameter object, reporting bad values as an ArtifactError."""
    try:
        return parse(art.hyper)
    except (TypeError, ValueError) as exc:
        raise ArtifactError(f"artifact hyperparameters are invalid: {exc}") from None
