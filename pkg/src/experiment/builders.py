"""从配置构造映射、共轭与余圈"""

import logging
from typing import Optional

import numpy as np

from ..cocycle import (
    CoboundaryCocycle,
    CocycleSpec,
    ConstantCocycle,
    MatrixTrigField,
    NormalizedCocycle,
    PullbackCocycle,
    TrigCocycle,
    UnstableDerivativeCocycle,
)
from ..config import CocycleSettings, ConjugacySettings, MapSettings, PerturbationTermSettings
from ..dynamics import AnosovMapModel, AutomorphismSpec, ConjugacyMapSpec, MapLike, PerturbationSpec, conjugate_model
from ..errors import ConfigError, NumericalError, PeriodicOrbitError
from ..orbits import find_periodic_orbits

logger = logging.getLogger(__name__)


def _terms(terms: list[PerturbationTermSettings]) -> list[tuple]:
    return [(t.frequency, t.amplitude, t.phase) for t in terms]


def build_model(settings: MapSettings) -> AnosovMapModel:
    try:
        automorphism = AutomorphismSpec.from_rows(settings.matrix)
        perturbation = PerturbationSpec.from_terms(_terms(settings.perturbation), settings.amplitude_bound)
        return AnosovMapModel(perturbation, settings.inverse_tolerance, automorphism=automorphism)
    except NumericalError as e:
        raise ConfigError(f"invalid map: {e}", **e.details) from e


def build_conjugacy(settings: ConjugacySettings) -> Optional[ConjugacyMapSpec]:
    if not settings.enabled:
        return None
    try:
        return ConjugacyMapSpec(PerturbationSpec.from_terms(_terms(settings.terms), settings.amplitude_bound))
    except NumericalError as e:
        raise ConfigError(f"invalid conjugacy: {e}", **e.details) from e


def build_partner(model: AnosovMapModel, conjugacy: Optional[ConjugacyMapSpec]) -> Optional[MapLike]:
    """g = h f h^{-1}"""
    return None if conjugacy is None else conjugate_model(model, conjugacy)


def build_cocycle(
    settings: CocycleSettings,
    model: AnosovMapModel,
    conjugacy: Optional[ConjugacyMapSpec] = None,
    rotation: float = 0.0,
) -> CocycleSpec:
    terms = [(t.frequency, t.coefficient, t.phase) for t in settings.terms]
    try:
        if settings.kind == "unstable_derivative":
            cocycle: CocycleSpec = UnstableDerivativeCocycle(eta=settings.eta, model=model, rotation=rotation)
        elif settings.kind == "constant":
            cocycle = ConstantCocycle(eta=settings.eta, matrix=np.array(settings.matrix, dtype=float))
        elif settings.kind == "coboundary":
            cocycle = CoboundaryCocycle(
                eta=settings.eta,
                model=model,
                matrix_field=MatrixTrigField.from_terms(settings.matrix, terms),
                middle=np.array(settings.middle, dtype=float),
            )
        elif settings.kind == "trig_custom":
            cocycle = TrigCocycle(eta=settings.eta, matrix_field=MatrixTrigField.from_terms(settings.matrix, terms))
        else:
            if conjugacy is None:
                raise ConfigError("pullback cocycle requires conjugacy.enabled = true")
            cocycle = PullbackCocycle(eta=settings.eta, model=model, conjugacy=conjugacy, rotation=rotation)
    except NumericalError as e:
        raise ConfigError(f"invalid cocycle: {e}", **e.details) from e
    return NormalizedCocycle(base=cocycle) if settings.normalize else cocycle


def fixed_point(model: MapLike) -> np.ndarray:
    orbits = find_periodic_orbits(model, 1)
    if not orbits:
        raise PeriodicOrbitError("map has no fixed point")
    return orbits[0].point
