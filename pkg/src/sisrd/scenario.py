"""JSON scenario configs: domain, coefficients, initial data, run controls.

A scenario file is a single JSON object.  Everything that can fail —
unknown keys, malformed formulas, missing fields, out-of-range exponents —
fails during :func:`load_scenario` / :func:`ScenarioConfig.from_dict`,
before any mesh is built or any solve starts.  Formula strings use the
expression language of :mod:`sisrd.formula` in the spatial variables
``x`` (and ``y`` on two-dimensional domains).

Example::

    {
      "version": 1,
      "name": "uniform-square",
      "domain": {"kind": "rectangle", "x_range": [0, 1], "y_range": [0, 1],
                 "shape": [65, 65]},
      "coefficients": {"beta": "2", "gamma": "1", "eta": "1", "lambda": "1"},
      "params": {"d_S": 0.1, "d_I": 0.05, "p": 1, "q": 1},
      "initial": {"S": "0.8", "I": "0.2"},
      "stopping": {"steady_tol": 1e-9, "t_final": 4000.0}
    }

Optional blocks: ``"stepping"`` (``dt_init``, ``dt_max``, ``dt_min``),
``"outputs"`` (``newton_refine``, ``snapshot_every``, ``mask_deltas``,
``zero_infection_tol``), a free-text ``"comment"``, and ``"sigma"`` (a
diffusion ratio used by sweep drivers).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Optional

from .coefficients import CoefficientSet
from .dynamics import SimState
from .formula import FormulaError, free_variables, parse
from .grid import DiscreteDomain, DomainSpec, build_domain

__all__ = ["ConfigError", "ScenarioConfig", "load_scenario"]


class ConfigError(ValueError):
    """A scenario file is malformed; the message names the offending key."""


_DOMAIN_KEYS = {
    "interval": {"start", "end", "nodes"},
    "rectangle": {"x_range", "y_range", "shape"},
    "disk": {"radius", "center", "cell_size"},
}
_COEFF_KEYS = {"beta", "gamma", "eta", "lambda"}
_PARAM_KEYS = {"d_S", "d_I", "p", "q"}
_STOP_KEYS = {"t_final", "steady_tol"}
_STEP_KEYS = {"dt_init", "dt_max", "dt_min"}
_OUTPUT_KEYS = {"newton_refine", "snapshot_every", "mask_deltas", "zero_infection_tol"}
_TOP_KEYS = {
    "version",
    "name",
    "comment",
    "domain",
    "coefficients",
    "params",
    "initial",
    "stopping",
    "stepping",
    "outputs",
    "sigma",
}


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"missing key {key!r} in {where}")
    return d[key]


def _no_extras(d: dict, allowed: set, where: str) -> None:
    extra = sorted(set(d) - allowed)
    if extra:
        raise ConfigError(f"unknown key(s) {extra} in {where}; allowed: {sorted(allowed)}")


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    return float(value)


def _formula_source(value, where: str, dim: int) -> str:
    """Accept a number or a formula string; parse-check strings eagerly."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return repr(float(value))
    if not isinstance(value, str):
        raise ConfigError(f"{where} must be a number or a formula string")
    try:
        tree = parse(value)
    except FormulaError as exc:
        raise ConfigError(f"bad formula for {where}: {exc}") from exc
    if dim == 1 and "y" in free_variables(tree):
        raise ConfigError(f"{where} references y but the domain is one-dimensional")
    return value


@dataclass(frozen=True)
class ScenarioConfig:
    """A fully validated scenario; building meshes and fields is deferred."""

    name: str
    comment: str
    domain_spec: DomainSpec
    beta: str
    gamma: str
    eta: str
    recruitment: str
    d_S: float
    d_I: float
    p: float
    q: float
    initial_S: str
    initial_I: str
    t_final: Optional[float]
    steady_tol: Optional[float]
    dt_init: float = 0.01
    dt_max: float = 0.1
    dt_min: float = 1e-9
    newton_refine: bool = True
    snapshot_every: int = 0
    mask_deltas: tuple = (1e-2, 1e-4)
    zero_infection_tol: float = 1e-2
    sigma: Optional[float] = None
    raw: dict = dc_field(default_factory=dict, repr=False)

    # -- construction -------------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict, origin: str = "scenario") -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise ConfigError(f"{origin}: top level must be a JSON object")
        _no_extras(data, _TOP_KEYS, origin)
        version = _require(data, "version", origin)
        if version != 1:
            raise ConfigError(f"{origin}: unsupported version {version!r}")

        dom_block = _require(data, "domain", origin)
        spec = cls._domain_spec(dom_block, f"{origin}.domain")
        dim = 1 if spec.kind == "interval" else 2

        coeff = _require(data, "coefficients", origin)
        _no_extras(coeff, _COEFF_KEYS, f"{origin}.coefficients")
        sources = {
            key: _formula_source(
                _require(coeff, key, f"{origin}.coefficients"),
                f"{origin}.coefficients.{key}",
                dim,
            )
            for key in ("beta", "gamma", "eta", "lambda")
        }

        params = _require(data, "params", origin)
        _no_extras(params, _PARAM_KEYS, f"{origin}.params")
        d_S = _number(_require(params, "d_S", f"{origin}.params"), "params.d_S")
        d_I = _number(_require(params, "d_I", f"{origin}.params"), "params.d_I")
        p = _number(_require(params, "p", f"{origin}.params"), "params.p")
        q = _number(_require(params, "q", f"{origin}.params"), "params.q")
        if d_S <= 0.0 or d_I <= 0.0:
            raise ConfigError("params.d_S and params.d_I must be positive")
        if not 0.0 < p <= 1.0:
            raise ConfigError(f"params.p must lie in (0, 1], got {p!r}")
        if q <= 0.0:
            raise ConfigError(f"params.q must be positive, got {q!r}")

        initial = _require(data, "initial", origin)
        _no_extras(initial, {"S", "I"}, f"{origin}.initial")
        init_S = _formula_source(
            _require(initial, "S", f"{origin}.initial"), f"{origin}.initial.S", dim
        )
        init_I = _formula_source(
            _require(initial, "I", f"{origin}.initial"), f"{origin}.initial.I", dim
        )

        stopping = _require(data, "stopping", origin)
        _no_extras(stopping, _STOP_KEYS, f"{origin}.stopping")
        t_final = stopping.get("t_final")
        steady_tol = stopping.get("steady_tol")
        if t_final is None and steady_tol is None:
            raise ConfigError(f"{origin}.stopping needs t_final, steady_tol, or both")
        if t_final is not None:
            t_final = _number(t_final, "stopping.t_final")
        if steady_tol is not None:
            steady_tol = _number(steady_tol, "stopping.steady_tol")

        stepping = data.get("stepping", {})
        _no_extras(stepping, _STEP_KEYS, f"{origin}.stepping")
        outputs = data.get("outputs", {})
        _no_extras(outputs, _OUTPUT_KEYS, f"{origin}.outputs")
        deltas = outputs.get("mask_deltas", [1e-2, 1e-4])
        if not isinstance(deltas, list) or not all(
            isinstance(d, (int, float)) and not isinstance(d, bool) and d > 0
            for d in deltas
        ):
            raise ConfigError("outputs.mask_deltas must be a list of positive numbers")

        sigma = data.get("sigma")
        if sigma is not None:
            sigma = _number(sigma, "sigma")
            if sigma <= 0.0:
                raise ConfigError("sigma must be positive")

        return cls(
            name=str(data.get("name", "scenario")),
            comment=str(data.get("comment", "")),
            domain_spec=spec,
            beta=sources["beta"],
            gamma=sources["gamma"],
            eta=sources["eta"],
            recruitment=sources["lambda"],
            d_S=d_S,
            d_I=d_I,
            p=p,
            q=q,
            initial_S=init_S,
            initial_I=init_I,
            t_final=t_final,
            steady_tol=steady_tol,
            dt_init=_number(stepping.get("dt_init", 0.01), "stepping.dt_init"),
            dt_max=_number(stepping.get("dt_max", 0.1), "stepping.dt_max"),
            dt_min=_number(stepping.get("dt_min", 1e-9), "stepping.dt_min"),
            newton_refine=bool(outputs.get("newton_refine", True)),
            snapshot_every=int(outputs.get("snapshot_every", 0)),
            mask_deltas=tuple(float(d) for d in deltas),
            zero_infection_tol=_number(
                outputs.get("zero_infection_tol", 1e-2), "outputs.zero_infection_tol"
            ),
            sigma=sigma,
            raw=data,
        )

    @staticmethod
    def _domain_spec(block, where: str) -> DomainSpec:
        if not isinstance(block, dict):
            raise ConfigError(f"{where} must be an object")
        kind = _require(block, "kind", where)
        if kind not in _DOMAIN_KEYS:
            raise ConfigError(
                f"{where}.kind must be one of {sorted(_DOMAIN_KEYS)}, got {kind!r}"
            )
        _no_extras(block, _DOMAIN_KEYS[kind] | {"kind"}, where)
        try:
            if kind == "interval":
                return DomainSpec.interval(
                    _number(_require(block, "start", where), f"{where}.start"),
                    _number(_require(block, "end", where), f"{where}.end"),
                    int(_require(block, "nodes", where)),
                )
            if kind == "rectangle":
                return DomainSpec.rectangle(
                    tuple(_require(block, "x_range", where)),
                    tuple(_require(block, "y_range", where)),
                    tuple(int(n) for n in _require(block, "shape", where)),
                )
            return DomainSpec.disk(
                _number(_require(block, "radius", where), f"{where}.radius"),
                tuple(block.get("center", (0.0, 0.0))),
                _number(_require(block, "cell_size", where), f"{where}.cell_size"),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad {where}: {exc}") from exc

    # -- realization --------------------------------------------------------

    def build_domain(self) -> DiscreteDomain:
        return build_domain(self.domain_spec)

    def build_coefficients(self, dom: DiscreteDomain) -> CoefficientSet:
        return CoefficientSet.from_formulas(
            dom,
            beta=self.beta,
            gamma=self.gamma,
            eta=self.eta,
            recruitment=self.recruitment,
            d_S=self.d_S,
            d_I=self.d_I,
            p=self.p,
            q=self.q,
        )

    def initial_state(self, dom: DiscreteDomain) -> SimState:
        from .coefficients import evaluate_formula_on

        S0 = evaluate_formula_on(dom, self.initial_S)
        I0 = evaluate_formula_on(dom, self.initial_I)
        if S0.min() <= 0.0:
            raise ConfigError("initial.S must be strictly positive on the domain")
        if I0.min() < 0.0:
            raise ConfigError("initial.I must be nonnegative on the domain")
        if self.p < 1.0 and I0.min() <= 0.0:
            raise ConfigError(
                "initial.I must be strictly positive when p < 1 "
                "(the incidence is not Lipschitz at I = 0)"
            )
        return SimState(dom.field(S0), dom.field(I0))


def load_scenario(path) -> ScenarioConfig:
    """Read and validate a scenario JSON file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return ScenarioConfig.from_dict(data, origin=str(path))
