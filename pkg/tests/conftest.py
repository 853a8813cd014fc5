"""
Shared fixtures.
"""

import pytest

from apps.geometry.params import Preset
from apps.geometry.services import PresetService
from tests.factories import IntegrationControlsFactory


@pytest.fixture
def hp1():
    return PresetService.resolve(Preset('hp', 1))


@pytest.fixture
def cap():
    return PresetService.resolve(Preset('cap', 1))


@pytest.fixture
def controls():
    return IntegrationControlsFactory()


@pytest.fixture
def exploring_controls():
    """Controls that run to the horizon without convergence detection."""
    return IntegrationControlsFactory(exploring=True)
