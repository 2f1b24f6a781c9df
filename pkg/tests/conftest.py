import pytest
from hypothesis import HealthCheck, settings

from notify_timing import kernels

settings.register_profile(
    "repo", derandomize=True, deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


@pytest.fixture(params=kernels.available_backends())
def backend(request, monkeypatch):
    """Run the test once per kernel backend."""
    monkeypatch.setattr(kernels, "backend", kernels.get_backend(request.param))
    return request.param
