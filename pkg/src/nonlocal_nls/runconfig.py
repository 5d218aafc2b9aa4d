"""Strict flat key-value run configuration.

The format is INI-like but deliberately rigid: a fixed set of sections,
a fixed set of keys per section, no interpolation, no defaults silently
filled from the environment.  Unknown sections or keys are errors, so a
config file fully determines a run and its SHA-256 hash (over the
normalized key=value lines) can stamp every output artifact.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .evolution import EvolveConfig
from .scattering import InitialProfile


class ConfigError(Exception):
    pass


_SCHEMA = {
    "profile": {"kind", "H_re", "H_im", "L", "sigma", "path", "decay_tol"},
    "kgrid": {"kmax", "n"},
    "rays": {"xi_list"},
    "evolve": {"dt", "T", "X", "N", "dealias_fraction", "boundary_tol",
               "blowup_factor", "snapshot_times"},
    "compare": {"t_min", "t_max", "n_probe"},
    "run": {"outdir", "seed", "property_tol"},
}


def _parse_lines(text: str) -> dict[str, dict[str, str]]:
    sections: dict[str, dict[str, str]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in _SCHEMA:
                raise ConfigError(f"line {lineno}: unknown section [{name}]")
            if name in sections:
                raise ConfigError(f"line {lineno}: duplicate section [{name}]")
            sections[name] = {}
            current = name
            continue
        if current is None:
            raise ConfigError(f"line {lineno}: key outside any section")
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in _SCHEMA[current]:
            raise ConfigError(f"line {lineno}: unknown key '{key}' in [{current}]")
        if key in sections[current]:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        sections[current][key] = val
    return sections


def _need(sec: dict, name: str, key: str) -> str:
    if key not in sec:
        raise ConfigError(f"[{name}] is missing required key '{key}'")
    return sec[key]


def _as_float(sec, name, key, default=None):
    if key not in sec:
        if default is None:
            raise ConfigError(f"[{name}] is missing required key '{key}'")
        return default
    try:
        return float(sec[key])
    except ValueError as exc:
        raise ConfigError(f"[{name}] {key}: not a number") from exc


def _as_int(sec, name, key, default=None):
    if key not in sec:
        if default is None:
            raise ConfigError(f"[{name}] is missing required key '{key}'")
        return default
    try:
        return int(sec[key])
    except ValueError as exc:
        raise ConfigError(f"[{name}] {key}: not an integer") from exc


def _as_float_list(sec, name, key):
    raw = _need(sec, name, key)
    try:
        return [float(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"[{name}] {key}: not a comma list of numbers") from exc


def load_profile_csv(path: Path, sigma: int,
                     decay_tol: float = 1e-10) -> InitialProfile:
    try:
        with open(path, encoding="utf-8") as fh:
            rows = list(csv.reader(l for l in fh if not l.startswith("#")))
    except OSError as exc:
        raise ConfigError(f"cannot read sample file {path}: {exc}") from exc
    if not rows or rows[0] != ["x", "Re q", "Im q"]:
        raise ConfigError(f"{path}: expected header 'x,Re q,Im q'")
    try:
        arr = np.array(rows[1:], dtype=float)
    except ValueError as exc:
        raise ConfigError(f"{path}: malformed numeric row") from exc
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ConfigError(f"{path}: expected three columns")
    from .scattering import ProfileError
    try:
        return InitialProfile.sampled(arr[:, 0], arr[:, 1] + 1j * arr[:, 2],
                                      sigma, decay_tol=decay_tol)
    except ProfileError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


@dataclass(frozen=True)
class RunConfig:
    profile: InitialProfile
    kmax: float
    kn: int
    xi_list: tuple[float, ...]
    evolve: EvolveConfig | None
    snapshot_times: tuple[float, ...]
    t_min: float
    t_max: float
    n_probe: int
    outdir: Path
    seed: int
    property_tol: float
    config_hash: str
    normalized: str = field(repr=False)

    def kgrid(self) -> np.ndarray:
        return np.linspace(-self.kmax, self.kmax, self.kn)


def parse_config(text: str, config_dir: Path | None = None) -> RunConfig:
    sections = _parse_lines(text)
    if "profile" not in sections:
        raise ConfigError("missing required section [profile]")
    prof_sec = sections["profile"]
    kind = _need(prof_sec, "profile", "kind")
    sigma = _as_int(prof_sec, "profile", "sigma")
    if sigma not in (1, -1):
        raise ConfigError("[profile] sigma must be 1 or -1")
    if kind == "box":
        H = complex(_as_float(prof_sec, "profile", "H_re"),
                    _as_float(prof_sec, "profile", "H_im", 0.0))
        L = _as_float(prof_sec, "profile", "L")
        if L <= 0:
            raise ConfigError("[profile] L must be positive")
        profile = InitialProfile.box(H, L, sigma)
    elif kind == "sampled":
        rel = Path(_need(prof_sec, "profile", "path"))
        base = config_dir if config_dir is not None else Path.cwd()
        decay_tol = _as_float(prof_sec, "profile", "decay_tol", 1e-10)
        profile = load_profile_csv(
            rel if rel.is_absolute() else base / rel, sigma, decay_tol)
    else:
        raise ConfigError(f"[profile] kind must be box or sampled, not '{kind}'")

    kgrid_sec = sections.get("kgrid", {})
    kmax = _as_float(kgrid_sec, "kgrid", "kmax", 12.0)
    kn = _as_int(kgrid_sec, "kgrid", "n", 2001)
    if kmax <= 0 or kn < 3 or kn % 2 == 0:
        raise ConfigError("[kgrid] needs kmax > 0 and odd n >= 3")

    xi_list: tuple[float, ...] = ()
    if "rays" in sections:
        xi_list = tuple(_as_float_list(sections["rays"], "rays", "xi_list"))

    evolve_cfg = None
    snapshot_times: tuple[float, ...] = ()
    if "evolve" in sections:
        ev = sections["evolve"]
        evolve_cfg = EvolveConfig(
            dt=_as_float(ev, "evolve", "dt"),
            T=_as_float(ev, "evolve", "T"),
            X=_as_float(ev, "evolve", "X", 128.0),
            N=_as_int(ev, "evolve", "N", 4096),
            dealias_fraction=_as_float(ev, "evolve", "dealias_fraction",
                                       2.0 / 3.0),
            boundary_tol=_as_float(ev, "evolve", "boundary_tol", 1e-6),
            blowup_factor=_as_float(ev, "evolve", "blowup_factor", 10.0),
        )
        if "snapshot_times" in ev:
            snapshot_times = tuple(_as_float_list(ev, "evolve",
                                                  "snapshot_times"))

    cmp_sec = sections.get("compare", {})
    t_min = _as_float(cmp_sec, "compare", "t_min", 20.0)
    t_max = _as_float(cmp_sec, "compare", "t_max", 80.0)
    n_probe = _as_int(cmp_sec, "compare", "n_probe", 25)
    if not (0.0 < t_min < t_max) or n_probe < 4:
        raise ConfigError("[compare] needs 0 < t_min < t_max and n_probe >= 4")

    run_sec = sections.get("run", {})
    outdir = Path(run_sec.get("outdir", "out"))
    seed = _as_int(run_sec, "run", "seed", 0)
    property_tol = _as_float(run_sec, "run", "property_tol", 1e-6)

    normalized = "\n".join(
        f"{s}.{k}={sections[s][k]}"
        for s in sorted(sections) for k in sorted(sections[s])) + "\n"
    h = hashlib.sha256(normalized.encode()).hexdigest()
    return RunConfig(
        profile=profile, kmax=kmax, kn=kn, xi_list=xi_list,
        evolve=evolve_cfg, snapshot_times=snapshot_times,
        t_min=t_min, t_max=t_max, n_probe=n_probe,
        outdir=outdir, seed=seed, property_tol=property_tol,
        config_hash=h, normalized=normalized,
    )


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    return parse_config(text, config_dir=p.parent)


__all__ = ["RunConfig", "ConfigError", "parse_config", "load_config",
           "load_profile_csv"]
