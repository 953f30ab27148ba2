import numpy as np
import pytest

from reckmf import RatingsMatrix, ScoreScale


@pytest.fixture
def five_star_scale():
    return ScoreScale((1, 2, 3, 4, 5))


@pytest.fixture
def tiny_matrix(five_star_scale):
    """3 users, 3 items, 6 ratings; enough signal for training-progress tests."""
    return RatingsMatrix(
        3, 3, five_star_scale,
        users=[0, 0, 1, 1, 2, 2],
        items=[0, 1, 1, 2, 0, 2],
        score_indices=[4, 2, 3, 1, 0, 2],
    )


def random_ratings(num_users, num_items, n, scale, seed, density_guard=True):
    """Random distinct (user, item) pairs with uniform score indices."""
    rng = np.random.default_rng(seed)
    if density_guard and n > num_users * num_items:
        raise ValueError("too many ratings requested")
    taken = set()
    users, items = [], []
    while len(taken) < n:
        u = int(rng.integers(num_users))
        i = int(rng.integers(num_items))
        if (u, i) not in taken:
            taken.add((u, i))
            users.append(u)
            items.append(i)
    kidx = rng.integers(0, scale.size, size=n)
    return RatingsMatrix(num_users, num_items, scale, users, items, kidx)
