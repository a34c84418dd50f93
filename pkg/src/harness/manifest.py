"""
Run manifests.

A manifest records what is needed to rerun an experiment bit for bit: the
configuration snapshot, the library version, the theory constants and every
per-run seed. Its hash covers exactly those fields. Wall-clock times and the
host string are recorded too but stay out of the hash, so two reruns of the
same configuration share a hash and their CSV files are byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import platform
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List

import numpy as np

from config.settings import VERSION


def canonical_json(value: Any) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def stable_hash(value: Any) -> str:
    return hashlib.sha256(canonical_json(value).encode("utf-8")).hexdigest()


def host_description() -> str:
    return (f"{platform.platform()} python-{platform.python_version()} "
            f"numpy-{np.__version__}")


@dataclass
class RunManifest:
    experiment: str
    config: Dict[str, Any]
    constants: Dict[str, str] = field(default_factory=dict)
    seeds: List[Dict[str, Any]] = field(default_factory=list)
    version: str = VERSION
    wall_clock: Dict[str, float] = field(default_factory=dict)
    host: str = field(default_factory=host_description)

    def hashed_payload(self) -> Dict[str, Any]:
        return {
            'experiment': self.experiment,
            'config': self.config,
            'constants': self.constants,
            'seeds': self.seeds,
            'version': self.version,
        }

    @property
    def digest(self) -> str:
        return stable_hash(self.hashed_payload())

    def to_dict(self) -> Dict[str, Any]:
        data = self.hashed_payload()
        data['wall_clock'] = self.wall_clock
        data['host'] = self.host
        data['sha256'] = self.digest
        return data

    def write(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
        return path


def load_manifest(path) -> RunManifest:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return RunManifest(
        experiment=data['experiment'],
        config=data['config'],
        constants=data.get('constants', {}),
        seeds=data.get('seeds', []),
        version=data.get('version', VERSION),
        wall_clock=data.get('wall_clock', {}),
        host=data.get('host', ""),
    )
