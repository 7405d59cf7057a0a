"""Attribute-based privacy framework: beliefs, publication, policies.

Entities are described by attribute->value maps in which a missing value
(NULL, represented as Python None) means "not disseminated".  An adversary
holds a prior belief over a declared finite universe of candidate models
and updates it by Bayes' rule after seeing the published restrictions.
Privacy requirements cap the posterior mass the adversary may place on
forbidden attribute values.

World knowledge is a likelihood function over (observation, candidate)
pairs.  Two deterministic special cases cover most uses: `consistency_kappa`
accepts every candidate that agrees with the observation on its revealed
attributes, and `exact_match_kappa` accepts only the observation itself,
which is the natural reading for a hypothesis space made of restricted
models.  Arbitrary tables are supported via `table_kappa`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Set, Tuple

import numpy as np

__all__ = [
    "EntityModel",
    "UserModel",
    "Belief",
    "Adversary",
    "Observation",
    "PublicationConfig",
    "PrivacyRequirement",
    "PrivacyPolicy",
    "restrict",
    "publish",
    "posterior",
    "sigma_satisfies",
    "is_sensitive",
    "is_critical",
    "total_variation",
    "impossibility_demo",
    "consistency_kappa",
    "exact_match_kappa",
    "table_kappa",
    "load_scenario",
    "run_scenario",
]

Kappa = Callable[[str, "EntityModel", str, "EntityModel"], float]


@dataclass(frozen=True)
class EntityModel:
    """Attribute->value map; attributes not present are NULL.

    NULL values passed in are dropped on construction, so two models are
    equal exactly when they agree on every non-NULL attribute.
    """

    values: Tuple[Tuple[str, str], ...]

    def __init__(self, values: Mapping[str, Optional[str]]):
        cleaned = tuple(sorted((a, v) for a, v in values.items() if v is not None))
        object.__setattr__(self, "values", cleaned)

    def value(self, attr: str) -> Optional[str]:
        for a, v in self.values:
            if a == attr:
                return v
        return None

    def domain(self) -> Set[str]:
        return {a for a, _ in self.values}

    def as_dict(self) -> Dict[str, str]:
        return dict(self.values)


@dataclass
class UserModel:
    """The entity models of one user's profiles, keyed by profile id."""

    profiles: Dict[str, EntityModel]

    def __post_init__(self):
        if not self.profiles:
            raise ValueError("user model needs at least one profile")


@dataclass
class Belief:
    """Per-profile probability mass over candidate model ids."""

    per_profile: Dict[str, Dict[str, float]]

    @classmethod
    def uniform(cls, profiles: Iterable[str], model_ids: Iterable[str]) -> "Belief":
        ids = list(model_ids)
        mass = 1.0 / len(ids)
        return cls({p: {mid: mass for mid in ids} for p in profiles})

    def validate(self, tol: float = 1e-9) -> None:
        for profile, masses in self.per_profile.items():
            if any(v < 0 for v in masses.values()):
                raise ValueError(f"negative prior mass for profile {profile!r}")
            total = sum(masses[mid] for mid in sorted(masses))
            if abs(total - 1.0) > tol:
                raise ValueError(f"prior for profile {profile!r} sums to {total}, not 1")


@dataclass
class Adversary:
    """Candidate universe, prior belief, and a world-knowledge likelihood."""

    universe: Dict[str, EntityModel]
    prior: Belief
    kappa: Kappa


@dataclass
class Observation:
    """The published (restricted, possibly perturbed) model per profile."""

    observed: Dict[str, EntityModel]


def consistency_kappa() -> Kappa:
    """Likelihood 1 for candidates agreeing with the observation where it is non-NULL."""

    def kappa(profile, observed, candidate_id, candidate):
        return 1.0 if all(candidate.value(a) == observed.value(a) for a in observed.domain()) else 0.0

    return kappa


def exact_match_kappa() -> Kappa:
    """Likelihood 1 only for the candidate equal to the observation itself."""

    def kappa(profile, observed, candidate_id, candidate):
        return 1.0 if candidate == observed else 0.0

    return kappa


def table_kappa(rows: Mapping[str, Mapping[str, float]]) -> Kappa:
    """Fixed per-profile likelihood table keyed by candidate id."""

    def kappa(profile, observed, candidate_id, candidate):
        return float(rows[profile].get(candidate_id, 0.0))

    return kappa


def restrict(model: EntityModel, attrs: Iterable[str]) -> EntityModel:
    """Keep the given attributes, NULL out everything else."""
    attrs = set(attrs)
    if not attrs:
        raise ValueError("attribute set must be nonempty")
    return EntityModel({a: v for a, v in model.values if a in attrs})


def _restrict_allow_empty(model: EntityModel, attrs: Set[str]) -> EntityModel:
    return EntityModel({a: v for a, v in model.values if a in attrs})


@dataclass(frozen=True)
class PublicationConfig:
    """Which attributes get revealed and which of those get perturbed.

    `perturb` maps an attribute to a fixed replacement value or to a list
    of values one of which is drawn at publication time.  At least one
    revealed attribute must stay unperturbed so the output always carries
    one true value.
    """

    reveal: frozenset
    perturb: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "reveal", frozenset(self.reveal))
        if not self.reveal:
            raise ValueError("publication must reveal at least one attribute")
        stray = set(self.perturb) - self.reveal
        if stray:
            raise ValueError(f"perturbed attributes not revealed: {sorted(stray)}")
        if not self.reveal - set(self.perturb):
            raise ValueError("publication must leave at least one revealed attribute unperturbed")


def publish(
    model: EntityModel, config: PublicationConfig, rng: Optional[np.random.Generator] = None
) -> EntityModel:
    """Apply a publication config: perturb selected values, then restrict."""
    values = dict(model.values)
    for attr in sorted(config.perturb):
        repl = config.perturb[attr]
        if isinstance(repl, (list, tuple)):
            if rng is None:
                raise ValueError("rng required for randomized perturbation")
            repl = repl[int(rng.integers(len(repl)))]
        values[attr] = repl
    return EntityModel({a: v for a, v in values.items() if a in config.reveal})


def posterior(adv: Adversary, obs: Observation, profile: str) -> Dict[str, float]:
    """Bayes update of the prior for one profile given its observation.

    Returns mass per candidate id, summing to one.  Raises when every
    candidate has zero likelihood-times-prior (the observation is
    impossible under the prior).
    """
    observed = obs.observed[profile]
    prior_p = adv.prior.per_profile[profile]
    weights = {}
    for mid, candidate in adv.universe.items():
        weights[mid] = adv.kappa(profile, observed, mid, candidate) * prior_p.get(mid, 0.0)
    evidence = sum(weights[mid] for mid in sorted(weights))
    if evidence <= 0.0:
        raise ValueError(f"observation impossible under prior for profile {profile!r}")
    return {mid: w / evidence for mid, w in weights.items()}


@dataclass(frozen=True)
class PrivacyRequirement:
    """Forbidden attribute values for one profile."""

    profile: str
    forbidden: Tuple[Tuple[str, str], ...]

    def __init__(self, profile: str, forbidden: Mapping[str, str]):
        object.__setattr__(self, "profile", profile)
        object.__setattr__(self, "forbidden", tuple(sorted(forbidden.items())))


@dataclass
class PrivacyPolicy:
    requirements: List[PrivacyRequirement]
    sigma: float

    def __post_init__(self):
        if not 0.0 <= self.sigma <= 1.0:
            raise ValueError("sigma must be in [0, 1]")

    def for_profile(self, profile: str) -> List[PrivacyRequirement]:
        return [r for r in self.requirements if r.profile == profile]


def sigma_satisfies(
    posterior_slice: Mapping[str, float],
    requirement: PrivacyRequirement,
    sigma: float,
    universe: Mapping[str, EntityModel],
) -> bool:
    """True iff every forbidden value carries posterior mass at most sigma."""
    for attr, value in requirement.forbidden:
        mass = sum(
            posterior_slice.get(mid, 0.0)
            for mid in sorted(universe)
            if universe[mid].value(attr) == value
        )
        if mass > sigma:
            return False
    return True


def is_sensitive(attrs: Iterable[str], policy: PrivacyPolicy, profile: str) -> bool:
    """True iff some requirement for this profile covers all of `attrs`."""
    attrs = set(attrs)
    for req in policy.for_profile(profile):
        if attrs <= {a for a, _ in req.forbidden}:
            return True
    return False


def is_critical(
    attrs: Iterable[str],
    profile: str,
    observation: Observation,
    adversary: Adversary,
    policy: PrivacyPolicy,
    sigma: float,
) -> bool:
    """Whether removing `attrs` from the published model flips a violation.

    `attrs` must be part of the published domain of the profile.  The check
    compares policy evaluation under the observation as-is against the
    observation with `attrs` nulled out; it is True iff some requirement is
    violated before and satisfied after.
    """
    attrs = set(attrs)
    observed = observation.observed[profile]
    if not attrs <= observed.domain():
        raise ValueError("attrs must be contained in the published domain of the profile")
    reduced = _restrict_allow_empty(observed, observed.domain() - attrs)
    reduced_obs = Observation({**observation.observed, profile: reduced})
    post_full = posterior(adversary, observation, profile)
    post_reduced = posterior(adversary, reduced_obs, profile)
    for req in policy.for_profile(profile):
        violated_full = not sigma_satisfies(post_full, req, sigma, adversary.universe)
        violated_reduced = not sigma_satisfies(post_reduced, req, sigma, adversary.universe)
        if violated_full and not violated_reduced:
            return True
    return False


def total_variation(x: Mapping[str, float], y: Mapping[str, float]) -> float:
    """Total variation distance, i.e. half the L1 distance on the union support."""
    keys = sorted(set(x) | set(y))
    return 0.5 * sum(abs(x.get(k, 0.0) - y.get(k, 0.0)) for k in keys)


def impossibility_demo(value: str = "x", default_value: str = "x_star") -> Dict[str, object]:
    """Worst-case construction showing posteriors can move by the maximum.

    One attribute survives publication unperturbed.  An adversary with a
    uniform prior over the two candidate models and no extra knowledge
    observes either the original value or the default-swapped one; the two
    posteriors are point masses on different candidates, so their total
    variation distance is 1 (or 0 in the degenerate case of equal values).
    """
    attr = "alias"
    original = EntityModel({attr: value})
    swapped = EntityModel({attr: default_value})
    universe = {"model_original": original, "model_swapped": swapped}
    adv = Adversary(
        universe=universe,
        prior=Belief.uniform(["P"], universe),
        kappa=consistency_kappa(),
    )
    config = PublicationConfig(reveal=frozenset({attr}))
    post_original = posterior(adv, Observation({"P": publish(original, config)}), "P")
    post_swapped = posterior(adv, Observation({"P": publish(swapped, config)}), "P")
    sd = total_variation(post_original, post_swapped)
    return {
        "sd": sd,
        "attribute": attr,
        "value": value,
        "default_value": default_value,
        "posterior_original": post_original,
        "posterior_swapped": post_swapped,
        "transcript": [
            f"universe: {attr}={value} vs {attr}={default_value}, uniform prior, no world knowledge",
            f"publication reveals {attr} unperturbed",
            f"posterior after observing {attr}={value}: {post_original}",
            f"posterior after observing {attr}={default_value}: {post_swapped}",
            f"total variation distance: {sd}",
        ],
    }


def _parse_model(values: Mapping[str, Optional[str]], attributes: Set[str], label: str) -> EntityModel:
    stray = set(values) - attributes
    if stray:
        raise ValueError(f"{label}: attributes not in declared universe: {sorted(stray)}")
    return EntityModel(values)


def load_scenario(source) -> Dict[str, object]:
    """Load a scenario from a path, file object, or already-parsed dict."""
    if isinstance(source, dict):
        return source
    if hasattr(source, "read"):
        return json.load(source)
    with open(source, "r", encoding="utf-8") as fh:
        return json.load(fh)


def run_scenario(source) -> Dict[str, object]:
    """Publish every profile of a scenario, update beliefs, evaluate the policy.

    See the README for the scenario file schema.  Deterministic given the
    scenario's `seed`.
    """
    scenario = load_scenario(source)
    attributes = set(scenario["attributes"])
    models = {
        mid: _parse_model(values, attributes, f"model {mid!r}")
        for mid, values in scenario["models"].items()
    }
    profiles = scenario["profiles"]
    sigma = float(scenario["policy"]["sigma"])
    policy = PrivacyPolicy(
        requirements=[
            PrivacyRequirement(r["profile"], r["forbid"])
            for r in scenario["policy"]["requirements"]
        ],
        sigma=sigma,
    )

    prior_masses = {}
    for name, profile_cfg in profiles.items():
        prior = profile_cfg.get("prior", "uniform")
        if prior == "uniform":
            prior_masses[name] = {mid: 1.0 / len(models) for mid in models}
        else:
            prior_masses[name] = {mid: float(prior.get(mid, 0.0)) for mid in models}
    belief = Belief(prior_masses)
    belief.validate(tol=1e-6)

    kappa_cfg = scenario.get("kappa", {"kind": "consistency"})
    kind = kappa_cfg.get("kind", "consistency")
    if kind == "consistency":
        kappa = consistency_kappa()
    elif kind == "exact_match":
        kappa = exact_match_kappa()
    elif kind == "table":
        kappa = table_kappa(kappa_cfg["rows"])
    else:
        raise ValueError(f"unknown kappa kind {kind!r}")

    adv = Adversary(universe=models, prior=belief, kappa=kappa)
    rng = np.random.default_rng(scenario.get("seed", 0))

    observed = {}
    for name in sorted(profiles):
        profile_cfg = profiles[name]
        true_model = models[profile_cfg["true_model"]]
        pub = profile_cfg.get("publish")
        if pub is None:
            config = PublicationConfig(reveal=frozenset(true_model.domain() or attributes))
        else:
            config = PublicationConfig(
                reveal=frozenset(pub["reveal"]), perturb=dict(pub.get("perturb", {}))
            )
        observed[name] = publish(true_model, config, rng)
    obs = Observation(observed)

    posteriors = {name: posterior(adv, obs, name) for name in sorted(profiles)}
    requirement_reports = []
    satisfied_all = True
    for req in policy.requirements:
        ok = sigma_satisfies(posteriors[req.profile], req, sigma, models)
        satisfied_all = satisfied_all and ok
        requirement_reports.append(
            {"profile": req.profile, "forbid": dict(req.forbidden), "satisfied": ok}
        )
    return {
        "sigma": sigma,
        "observation": {name: model.as_dict() for name, model in observed.items()},
        "posteriors": posteriors,
        "requirements": requirement_reports,
        "policy_satisfied": satisfied_all,
    }
