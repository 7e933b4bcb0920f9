from utils.validators import as_point, require_member, require_count
from utils.decorators import numerical_guard, logged
from utils.rng import stream, derive_seed

__all__ = [
    'as_point', 'require_member', 'require_count',
    'numerical_guard', 'logged', 'stream', 'derive_seed',
]
