"""Physical constants and the particle data table.

Masses are kept as rest-mass energies in eV. The constants default to the
exact SI-2019 values and may be overridden with a ``key = value`` file, which
is how the quantum-correspondence numerics run in natural units.
"""

from __future__ import annotations

import configparser
import csv
import io
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from importlib import resources
from typing import IO, Iterable, Union

from .errors import ConflictError, DomainError, ParseError

__all__ = [
    "Constants",
    "ParticleSpec",
    "SI_2019",
    "constants_from_config",
    "load_particle_table",
    "dump_particle_table",
    "default_particles",
    "particle_by_name",
]

Source = Union[bytes, str, IO[bytes], IO[str]]

PARTICLE_HEADER = ("name", "mass_ev", "charge", "spin")


@dataclass(frozen=True)
class Constants:
    h: float = 6.62607015e-34  # J s
    c: float = 299792458.0  # m / s
    electronvolt: float = 1.602176634e-19  # J per eV

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"constant {name} must be finite and positive, got {value!r}")

    @property
    def h_ev(self) -> float:
        """Planck constant in eV s."""
        return self.h / self.electronvolt

    def as_dict(self) -> dict:
        return asdict(self)


SI_2019 = Constants()


@dataclass(frozen=True)
class ParticleSpec:
    name: str
    rest_mass_energy: float  # eV
    charge: float = 0.0
    spin: Fraction = Fraction(0)

    def __post_init__(self):
        if not self.name or any(ch.isspace() for ch in self.name):
            raise DomainError(f"invalid particle name {self.name!r}")
        if not (math.isfinite(self.rest_mass_energy) and self.rest_mass_energy >= 0):
            raise DomainError(f"rest mass energy of {self.name} must be >= 0")

    @property
    def massless(self) -> bool:
        return self.rest_mass_energy == 0


def _read_text(source: Source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def constants_from_config(source: Source | None = None) -> Constants:
    """Build :class:`Constants` from optional ``key = value`` text.

    Recognised keys are ``h``, ``c`` and ``electronvolt``; ``#`` starts a
    comment. Missing keys keep their SI-2019 defaults.
    """
    if source is None:
        return SI_2019
    parser = configparser.ConfigParser(comment_prefixes=("#",), inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string("[constants]\n" + _read_text(source))
    except configparser.Error as exc:
        raise ParseError(f"malformed constants file: {exc}") from exc
    values = {}
    known = set(asdict(SI_2019))
    for key, raw in parser["constants"].items():
        if key not in known:
            raise ParseError(f"unknown constant {key!r}; expected one of {sorted(known)}")
        try:
            values[key] = float(raw)
        except ValueError as exc:
            raise ParseError(f"constant {key!r} is not a number: {raw!r}") from exc
    return Constants(**values)


def load_particle_table(source: Source) -> list[ParticleSpec]:
    """Parse a ``name,mass_ev,charge,spin`` CSV into particle specs.

    Lines starting with ``#`` and blank lines are ignored. Order is kept.
    """
    lines = _read_text(source).splitlines()
    rows = [(no, line) for no, line in enumerate(lines, start=1)
            if line.strip() and not line.lstrip().startswith("#")]
    if not rows:
        raise ParseError("particle table is missing its header")
    header_no, header = rows[0]
    fields = tuple(f.strip() for f in next(csv.reader([header])))
    if fields != PARTICLE_HEADER:
        raise ParseError(f"line {header_no}: expected header {','.join(PARTICLE_HEADER)}, got {header!r}")

    particles: list[ParticleSpec] = []
    seen: dict[str, int] = {}
    for no, line in rows[1:]:
        cells = [c.strip() for c in next(csv.reader([line]))]
        if len(cells) != 4:
            raise ParseError(f"line {no}: expected 4 fields, got {len(cells)}")
        name, mass, charge, spin = cells
        try:
            particle = ParticleSpec(name, float(mass), float(charge), Fraction(spin))
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"line {no}: {exc}") from exc
        if name in seen:
            raise ConflictError(f"line {no}: duplicate particle {name!r} (first on line {seen[name]})")
        seen[name] = no
        particles.append(particle)
    return particles


def dump_particle_table(particles: Iterable[ParticleSpec]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(PARTICLE_HEADER)
    for p in particles:
        writer.writerow([p.name, repr(p.rest_mass_energy), repr(p.charge), str(p.spin)])
    return buf.getvalue()


def default_particles() -> list[ParticleSpec]:
    text = resources.files("cyclochron").joinpath("data/particles.csv").read_text("utf-8")
    return load_particle_table(text)


def particle_by_name(name: str, table: Iterable[ParticleSpec] | None = None) -> ParticleSpec:
    for p in default_particles() if table is None else table:
        if p.name == name:
            return p
    raise KeyError(name)
