"""
Shared configuration for shiftlab.
Defaults, an optional JSON configuration file and the SHIFTLAB_MAX_BITS
environment override are merged into one read-only Config.
"""

import json
import logging
import os
import threading
from dataclasses import asdict, dataclass, fields, replace

from dotenv import load_dotenv

from errors import ConfigError

# Load environment variables
load_dotenv()

VERSION = '0.3.0'

MAX_BITS_ENV = 'SHIFTLAB_MAX_BITS'

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Config:
    default_K: int = 16
    default_N: int = 64
    start_bits: int = 256
    max_bits: int = 4096
    hankel_cap: int = 12
    witness_window_cap: int = 4096
    workers: int = 1

    def validate(self):
        """Raise ConfigError naming the first offending key."""
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f.name, f'expected a positive integer, got {value!r}')
            if value <= 0:
                raise ConfigError(f.name, f'must be positive, got {value}')
        if self.start_bits > self.max_bits:
            raise ConfigError('start_bits', f'start_bits={self.start_bits} exceeds max_bits={self.max_bits}')
        return self

    def to_dict(self):
        return asdict(self)


def _env_max_bits():
    raw = os.environ.get(MAX_BITS_ENV)
    if raw is None or raw.strip() == '':
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError('max_bits', f'{MAX_BITS_ENV}={raw!r} is not an integer')


def load_config(path=None, overrides=None):
    """Merge defaults, the JSON file at `path`, the environment and explicit overrides (in that order)."""
    values = {}
    if path is not None:
        try:
            with open(path) as f:
                document = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError('<file>', f'{path} is not valid JSON ({e})')
        except OSError as e:
            raise ConfigError('<file>', f'cannot read {path}: {e.strerror}')
        if not isinstance(document, dict):
            raise ConfigError('<file>', f'{path} must contain a JSON object')
        values.update(document)
    env_bits = _env_max_bits()
    if env_bits is not None:
        values['max_bits'] = env_bits
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})

    known = {f.name for f in fields(Config)}
    for key in values:
        if key not in known:
            raise ConfigError(key, 'unknown configuration key')

    config = replace(Config(), **values).validate()
    logger.debug('config loaded %s', ' '.join(f'{k}={v}' for k, v in config.to_dict().items()))
    return config


_current = None
_current_lock = threading.Lock()


def current_config():
    """The process-wide configuration, loaded on first use."""
    global _current
    with _current_lock:
        if _current is None:
            _current = load_config()
        return _current


def set_current_config(config):
    """Install `config` as the process-wide configuration (used by the CLI)."""
    global _current
    with _current_lock:
        _current = config.validate()


def resolve(config):
    return config if config is not None else current_config()


# Commands mapped to the results they check.
DOCS_MAP = {
    'analyze cm': 'nabla^k x >= 0: completely monotone sequences (Hausdorff moments)',
    'analyze ca': 'nabla^k x <= 0 for k >= 1: completely alternating sequences',
    'analyze log-ca': 'ln x completely alternating',
    'analyze mid': 'MID iff the weights squared are log completely alternating',
    'analyze contractive': 'n-contractivity in moment form',
    'analyze bram-halmos': 'Hankel matrices H(n,k) positive semidefinite',
    'analyze hyperexpansive': 'completely hyperexpansive shifts (moments completely alternating)',
    'analyze order': 'largest k for which the sequence is k-hyperalternating',
    'transform': 'Aluthge, mean and Cesaro transforms, reciprocals and restrictions',
    'export': 'moments, difference tables and Hankel matrices',
}
