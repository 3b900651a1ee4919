"""Environment registry addressable by name."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Callable

from input_inference.errors import ConfigError

if TYPE_CHECKING:
    from input_inference.models.environments import Environment


@dataclass(frozen=True)
class RegisteredEnvironment:
    name: str
    factory: Callable[..., Environment]
    defaults: dict[str, Any] = field(default_factory=dict)


_REGISTRY: dict[str, RegisteredEnvironment] = {}


def register_environment(name: str, **defaults: Any) -> Callable:
    """Class decorator registering an environment with its experiment defaults.

    ``defaults`` uses the dotted configuration keys, e.g. ``"em.alpha_init"``.
    """

    def decorator(cls: type) -> type:
        _REGISTRY[name] = RegisteredEnvironment(name=name, factory=cls, defaults=dict(defaults))
        return cls

    return decorator


def _ensure_loaded() -> None:
    import input_inference.models.environments  # noqa: F401  registers the built-in environments


def environment_names() -> list[str]:
    _ensure_loaded()
    return sorted(_REGISTRY)


def get_registered(name: str) -> RegisteredEnvironment:
    _ensure_loaded()
    try:
        return _REGISTRY[name]
    except KeyError:
        raise ConfigError(
            f"unknown environment {name!r}; choose one of {', '.join(sorted(_REGISTRY))}"
        ) from None


def make_environment(
    name: str,
    *,
    dt: float | None = None,
    horizon: int | None = None,
    process_noise_scale: float = 1.0,
) -> Environment:
    entry = get_registered(name)
    return entry.factory(dt=dt, horizon=horizon, process_noise_scale=process_noise_scale)


def registry_defaults(name: str) -> dict[str, Any]:
    return dict(get_registered(name).defaults)
