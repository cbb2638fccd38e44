"""Meridian Bloch model: normalized relaxation rates and the drift/control
vector fields with their Lie brackets, for one spin species or a pair of
species driven by the same control.

States live in the closed unit disk of the (y, z) meridian plane; a two-spin
state is the concatenation q = (y1, z1, y2, z2).  Time is normalized as
tau = omega_max * t / (2*pi), which puts the control bound at 2*pi.

Per species, with big_gamma = 2*pi/(omega_max*T2) and gamma =
2*pi/(omega_max*T1), the fields are

    F0 = (-big_gamma*y, gamma*(1 - z))        relaxation drift
    F1 = (-z, y)                              control rotation

and delta = gamma - big_gamma enters every bracket.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

# default peak RF amplitude (rad/s) and normalized control bound
DEFAULT_OMEGA_MAX = TWO_PI * 32.3
DEFAULT_BOUND = TWO_PI

# dynamically invariant disk, with a floating-point band
BALL_TOL = 1e-9

# named (T1, T2) presets in milliseconds
PRESETS_MS = {
    "fluid": (2000.0, 200.0),
    "water": (2500.0, 2500.0),
    "grey": (920.0, 100.0),
    "white": (780.0, 90.0),
    "deoxy-blood": (1350.0, 50.0),
    "oxy-blood": (1300.0, 200.0),
}

FIELD_NAMES = ("F0", "F1")
BRACKET_NAMES = ("ad1", "ad100", "ad101")


class DomainError(ValueError):
    """Physically inadmissible parameters or states."""


def normalize_params(t1, t2, omega_max=DEFAULT_OMEGA_MAX):
    """Dimensionless rate pair (big_gamma, gamma) from physical times.

    big_gamma = 2*pi/(omega_max*t2), gamma = 2*pi/(omega_max*t1), with t1, t2
    in seconds and omega_max in rad/s.  Requires t2 <= 2*t1 (physical
    relaxation constraint), so big_gamma >= gamma/2 > 0.
    """
    if not (t1 > 0.0 and t2 > 0.0 and omega_max > 0.0):
        raise DomainError("t1, t2 and omega_max must all be positive")
    if t2 > 2.0 * t1:
        raise DomainError(f"t2={t2} violates t2 <= 2*t1 (t1={t1})")
    return TWO_PI / (omega_max * t2), TWO_PI / (omega_max * t1)


@dataclass(frozen=True)
class RelaxationParams:
    """Relaxation times of one species, in seconds, plus the RF bound."""

    t1: float
    t2: float
    omega_max: float = DEFAULT_OMEGA_MAX

    def __post_init__(self):
        normalize_params(self.t1, self.t2, self.omega_max)

    @property
    def big_gamma(self):
        return TWO_PI / (self.omega_max * self.t2)

    @property
    def gamma(self):
        return TWO_PI / (self.omega_max * self.t1)

    @property
    def delta(self):
        return self.gamma - self.big_gamma

    @property
    def rates(self):
        """(big_gamma, gamma) pair."""
        return self.big_gamma, self.gamma

    @classmethod
    def from_ms(cls, t1_ms, t2_ms, omega_max=DEFAULT_OMEGA_MAX):
        return cls(t1_ms / 1000.0, t2_ms / 1000.0, omega_max)

    @classmethod
    def preset(cls, name, omega_max=DEFAULT_OMEGA_MAX):
        try:
            t1_ms, t2_ms = PRESETS_MS[name]
        except KeyError:
            known = ", ".join(sorted(PRESETS_MS))
            raise DomainError(f"unknown preset {name!r} (known: {known})") from None
        return cls.from_ms(t1_ms, t2_ms, omega_max)


@dataclass(frozen=True)
class SpinState:
    """Point of the meridian disk y^2 + z^2 <= 1."""

    y: float
    z: float

    def __post_init__(self):
        r2 = self.y * self.y + self.z * self.z
        if r2 > 1.0 + BALL_TOL:
            raise DomainError(f"state ({self.y}, {self.z}) outside the unit disk")

    def as_array(self):
        return np.array([self.y, self.z])


@dataclass(frozen=True)
class ProductState:
    """Pair of meridian states, flattened as (y1, z1, y2, z2)."""

    spin1: SpinState
    spin2: SpinState

    def as_array(self):
        return np.array([self.spin1.y, self.spin1.z, self.spin2.y, self.spin2.z])


def as_state_array(state):
    """Coerce a SpinState/ProductState/array-like to a flat (2,) or (4,) array."""
    if isinstance(state, SpinState) or isinstance(state, ProductState):
        return state.as_array()
    arr = np.asarray(state, dtype=float).ravel()
    if arr.size not in (2, 4):
        raise DomainError(f"state must have 2 or 4 components, got {arr.size}")
    return arr


def rate_table(params, n_spins):
    """Arrays (big_gamma_i, gamma_i) for the requested number of spins."""
    if isinstance(params, RelaxationParams):
        plist = [params]
    else:
        plist = list(params)
    if len(plist) != n_spins:
        raise DomainError(f"need parameters for {n_spins} spin(s), got {len(plist)}")
    big = np.array([p.big_gamma for p in plist])
    small = np.array([p.gamma for p in plist])
    return big, small


def _per_spin(which, y, z, big, small):
    """Componentwise (y, z) value of a field or bracket, vectorized over spins."""
    delta = small - big
    if which == "F0":
        return -big * y, small * (1.0 - z)
    if which == "F1":
        return -z, y
    if which == "ad1":  # [F1, F0]
        return -small + delta * z, delta * y
    if which == "ad100":  # [[F1, F0], F0]
        return small * (small - 2.0 * big) - delta**2 * z, delta**2 * y
    if which == "ad101":  # [[F1, F0], F1]
        return 2.0 * delta * y, small - 2.0 * delta * z
    raise DomainError(f"unknown field/bracket selector {which!r}")


def _eval(which, state, params):
    q = as_state_array(state)
    n_spins = q.size // 2
    big, small = rate_table(params, n_spins)
    y, z = q[0::2], q[1::2]
    vy, vz = _per_spin(which, y, z, big, small)
    out = np.empty_like(q)
    out[0::2] = vy
    out[1::2] = vz
    return out


def eval_field(which, state, params):
    """Evaluate F0 or F1 at a meridian state (single-spin or product)."""
    if which not in FIELD_NAMES:
        raise DomainError(f"field selector must be one of {FIELD_NAMES}")
    return _eval(which, state, params)


def eval_bracket(which, state, params):
    """Evaluate a Lie bracket at a state.

    Selectors: 'ad1' = [F1,F0], 'ad100' = [[F1,F0],F0], 'ad101' = [[F1,F0],F1].
    """
    if which not in BRACKET_NAMES:
        raise DomainError(f"bracket selector must be one of {BRACKET_NAMES}")
    return _eval(which, state, params)


def eval_field3(which, state, params):
    """Full Bloch fields with both control channels, per-spin blocks (x, y, z).

    F0 = (-G*x, -G*y, g*(1-z)), F1 = (0, -z, y), F2 = (z, 0, -x).  Used by the
    two-input order-zero control and the embedding checks; the planar modules
    keep x = 0 and u2 = 0.
    """
    q = np.asarray(state, dtype=float).ravel()
    if q.size % 3 != 0 or q.size not in (3, 6):
        raise DomainError(f"3D state must have 3 or 6 components, got {q.size}")
    n_spins = q.size // 3
    big, small = rate_table(params, n_spins)
    x, y, z = q[0::3], q[1::3], q[2::3]
    out = np.empty_like(q)
    if which == "F0":
        out[0::3], out[1::3], out[2::3] = -big * x, -big * y, small * (1.0 - z)
    elif which == "F1":
        out[0::3], out[1::3], out[2::3] = 0.0 * x, -z, y
    elif which == "F2":
        out[0::3], out[1::3], out[2::3] = z, 0.0 * y, -x
    else:
        raise DomainError(f"unknown 3D field selector {which!r}")
    return out


def species_from_config(cfg):
    """Build (spin1, spin2, omega_max) from a config mapping.

    Schema: {"spin1": {"t1_ms": ..., "t2_ms": ...} | {"preset": name},
             "spin2": {...}, "omega_max_hz": ...}.  omega_max_hz is the RF
    amplitude in Hz (converted to rad/s); spin2 may be omitted.
    """
    omega_max = DEFAULT_OMEGA_MAX
    if "omega_max_hz" in cfg:
        omega_max = TWO_PI * float(cfg["omega_max_hz"])

    def one(entry):
        if entry is None:
            return None
        if "preset" in entry:
            return RelaxationParams.preset(entry["preset"], omega_max)
        return RelaxationParams.from_ms(
            float(entry["t1_ms"]), float(entry["t2_ms"]), omega_max
        )

    spin1 = one(cfg.get("spin1"))
    if spin1 is None:
        raise DomainError("config must define spin1")
    return spin1, one(cfg.get("spin2")), omega_max


def load_config(path):
    with open(path) as fh:
        return species_from_config(json.load(fh))
