"""Parameter containers for the adapter-routed classifier head."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..corpus import NUM_CLASSES, LanguageTag

VARIANT_PER_LANGUAGE = "per_language"
VARIANT_SHARED = "shared"
VARIANT_NONE = "none"
VARIANTS = (VARIANT_PER_LANGUAGE, VARIANT_SHARED, VARIANT_NONE)

# Route keys as they appear in checkpoints. English shares one common adapter;
# Hindi and Punjabi get their own.
ROUTE_EN_COMMON = "EN-common"
ROUTE_SHARED = "shared"

_PER_LANGUAGE_ROUTES = (ROUTE_EN_COMMON, "HI", "PA")
_ROUTE_BY_LANGUAGE = {
    LanguageTag.EN: ROUTE_EN_COMMON,
    LanguageTag.HI: "HI",
    LanguageTag.PA: "PA",
}


class ShapeError(ValueError):
    pass


def routes_for_variant(variant: str) -> tuple[str, ...]:
    if variant == VARIANT_PER_LANGUAGE:
        return _PER_LANGUAGE_ROUTES
    if variant == VARIANT_SHARED:
        return (ROUTE_SHARED,)
    if variant == VARIANT_NONE:
        return ()
    raise ValueError(f"unknown variant {variant!r} (expected one of {VARIANTS})")


def route_for(language: LanguageTag, variant: str) -> str | None:
    """Adapter route for a language, or None when the variant has no adapter."""
    if variant == VARIANT_PER_LANGUAGE:
        return _ROUTE_BY_LANGUAGE[language]
    if variant == VARIANT_SHARED:
        return ROUTE_SHARED
    if variant == VARIANT_NONE:
        return None
    raise ValueError(f"unknown variant {variant!r} (expected one of {VARIANTS})")


@dataclass
class AdapterParams:
    """Bottleneck projection weights: down (r x d), up (d x r) and their biases."""

    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray

    @classmethod
    def zeros(cls, dim: int, bottleneck: int) -> "AdapterParams":
        return cls(
            W1=np.zeros((bottleneck, dim)),
            b1=np.zeros(bottleneck),
            W2=np.zeros((dim, bottleneck)),
            b2=np.zeros(dim),
        )

    def check(self, dim: int, bottleneck: int) -> None:
        expected = {
            "W1": (bottleneck, dim),
            "b1": (bottleneck,),
            "W2": (dim, bottleneck),
            "b2": (dim,),
        }
        for name, shape in expected.items():
            array = getattr(self, name)
            if array.shape != shape:
                raise ShapeError(f"adapter {name}: expected shape {shape}, got {array.shape}")
            if not np.all(np.isfinite(array)):
                raise ShapeError(f"adapter {name}: non-finite entry")

    def copy(self) -> "AdapterParams":
        return AdapterParams(self.W1.copy(), self.b1.copy(), self.W2.copy(), self.b2.copy())


@dataclass
class ClassifierParams:
    Wc: np.ndarray
    bc: np.ndarray

    @classmethod
    def zeros(cls, dim: int) -> "ClassifierParams":
        return cls(Wc=np.zeros((NUM_CLASSES, dim)), bc=np.zeros(NUM_CLASSES))

    def check(self, dim: int) -> None:
        if self.Wc.shape != (NUM_CLASSES, dim):
            raise ShapeError(
                f"classifier Wc: expected shape {(NUM_CLASSES, dim)}, got {self.Wc.shape}"
            )
        if self.bc.shape != (NUM_CLASSES,):
            raise ShapeError(f"classifier bc: expected shape {(NUM_CLASSES,)}, got {self.bc.shape}")
        if not (np.all(np.isfinite(self.Wc)) and np.all(np.isfinite(self.bc))):
            raise ShapeError("classifier parameters contain a non-finite entry")

    def copy(self) -> "ClassifierParams":
        return ClassifierParams(self.Wc.copy(), self.bc.copy())


@dataclass
class ModelParams:
    """Full parameter bank: adapters keyed by route plus the linear classifier."""

    dim: int
    bottleneck: int
    variant: str
    adapters: dict[str, AdapterParams] = field(default_factory=dict)
    classifier: ClassifierParams | None = None

    def check(self) -> None:
        expected_routes = routes_for_variant(self.variant)
        if tuple(self.adapters) != expected_routes:
            raise ShapeError(
                f"variant {self.variant!r} expects adapter routes {expected_routes}, "
                f"got {tuple(self.adapters)}"
            )
        for adapter in self.adapters.values():
            adapter.check(self.dim, self.bottleneck)
        if self.classifier is None:
            raise ShapeError("classifier parameters missing")
        self.classifier.check(self.dim)

    def tensors(self) -> list[tuple[str, np.ndarray]]:
        """All parameter tensors in a fixed, stable order."""
        out: list[tuple[str, np.ndarray]] = []
        for route in routes_for_variant(self.variant):
            adapter = self.adapters[route]
            for name in ("W1", "b1", "W2", "b2"):
                out.append((f"adapter:{route}:{name}", getattr(adapter, name)))
        out.append(("classifier:Wc", self.classifier.Wc))
        out.append(("classifier:bc", self.classifier.bc))
        return out

    def copy(self) -> "ModelParams":
        return ModelParams(
            dim=self.dim,
            bottleneck=self.bottleneck,
            variant=self.variant,
            adapters={route: adapter.copy() for route, adapter in self.adapters.items()},
            classifier=self.classifier.copy(),
        )

    def to_json_obj(self) -> dict:
        return {
            "dim": self.dim,
            "bottleneck": self.bottleneck,
            "variant": self.variant,
            "adapters": {
                route: {
                    "W1": adapter.W1.tolist(),
                    "b1": adapter.b1.tolist(),
                    "W2": adapter.W2.tolist(),
                    "b2": adapter.b2.tolist(),
                }
                for route, adapter in self.adapters.items()
            },
            "classifier": {
                "Wc": self.classifier.Wc.tolist(),
                "bc": self.classifier.bc.tolist(),
            },
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "ModelParams":
        params = cls(
            dim=int(obj["dim"]),
            bottleneck=int(obj["bottleneck"]),
            variant=obj["variant"],
            adapters={
                route: AdapterParams(
                    W1=np.asarray(bank["W1"], dtype=np.float64),
                    b1=np.asarray(bank["b1"], dtype=np.float64),
                    W2=np.asarray(bank["W2"], dtype=np.float64),
                    b2=np.asarray(bank["b2"], dtype=np.float64),
                )
                for route, bank in obj["adapters"].items()
            },
            classifier=ClassifierParams(
                Wc=np.asarray(obj["classifier"]["Wc"], dtype=np.float64),
                bc=np.asarray(obj["classifier"]["bc"], dtype=np.float64),
            ),
        )
        params.check()
        return params


def _uniform(rng: np.random.Generator, bound: float, shape: tuple[int, ...]) -> np.ndarray:
    return rng.uniform(-bound, bound, size=shape)


def init_params(
    dim: int, bottleneck: int, variant: str, rng: np.random.Generator
) -> ModelParams:
    """Symmetric-uniform init with bound 1/sqrt(fan_in), drawn in a fixed order."""
    down_bound = 1.0 / np.sqrt(dim)
    up_bound = 1.0 / np.sqrt(bottleneck)
    adapters: dict[str, AdapterParams] = {}
    for route in routes_for_variant(variant):
        adapters[route] = AdapterParams(
            W1=_uniform(rng, down_bound, (bottleneck, dim)),
            b1=_uniform(rng, down_bound, (bottleneck,)),
            W2=_uniform(rng, up_bound, (dim, bottleneck)),
            b2=_uniform(rng, up_bound, (dim,)),
        )
    classifier = ClassifierParams(
        Wc=_uniform(rng, down_bound, (NUM_CLASSES, dim)),
        bc=_uniform(rng, down_bound, (NUM_CLASSES,)),
    )
    return ModelParams(
        dim=dim, bottleneck=bottleneck, variant=variant, adapters=adapters, classifier=classifier
    )
