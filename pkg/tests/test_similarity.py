"""Exact and hash-approximated image similarity."""

import math

import numpy as np
import pytest

from hashloop.descriptors import SubstringConfig, flip_bits, random_descriptors
from hashloop.index import MultiIndexTables
from hashloop.similarity import (
    SimilarityParams,
    approx_similarity,
    exact_image_similarity,
    exact_similarity_vector,
    feature_similarity,
)

import oracles


def build_tables(images, bucket_cap=None):
    tables = MultiIndexTables(SubstringConfig(), bucket_cap=bucket_cap)
    for i, image in enumerate(images):
        tables.insert_image(i, image)
    return tables


def random_images(rng, n_images, n_features):
    return [random_descriptors(rng, n_features) for _ in range(n_images)]


class TestFeatureSimilarity:
    def test_zero_distance_is_one(self):
        assert feature_similarity(0) == 1.0

    def test_sigma_scale(self):
        assert feature_similarity(16) == pytest.approx(math.exp(-1.0),
                                                       rel=1e-15)

    def test_cutoff(self):
        params = SimilarityParams()
        assert feature_similarity(60, params) == pytest.approx(
            math.exp(-(60.0 ** 2) / 256.0), rel=1e-15)
        assert feature_similarity(61, params) == 0.0
        assert feature_similarity(256, params) == 0.0

    def test_monotone_in_distance(self):
        values = [feature_similarity(d) for d in range(0, 61)]
        assert all(a >= b for a, b in zip(values, values[1:]))

    def test_validation(self):
        with pytest.raises(ValueError):
            feature_similarity(-1)
        with pytest.raises(ValueError):
            feature_similarity(257)
        with pytest.raises(ValueError):
            SimilarityParams(sigma=0.0)
        with pytest.raises(ValueError):
            SimilarityParams(max_distance=300)


class TestExactSimilarity:
    def test_identical_single_feature(self, rng):
        image = random_descriptors(rng, 1)
        assert exact_image_similarity(image, image) == 1.0

    def test_hand_computed_pair(self, rng):
        a = random_descriptors(rng, 1)
        b = flip_bits(a[0], range(16)).reshape(1, 4)
        both = np.vstack([a, b])
        # pairs: (a,a)=1, (a,b)=e^-1 twice, (b,b)=1 over 4 pairs
        expected = (2 + 2 * math.exp(-1.0)) / 4.0
        assert exact_image_similarity(both, both) == pytest.approx(
            expected, rel=1e-12)

    def test_duplicate_image_value(self, rng):
        # self-pairs contribute 1 each, random cross pairs are far: F/F^2
        image = random_descriptors(rng, 20)
        assert exact_image_similarity(image, image) == pytest.approx(
            0.05, rel=1e-12)

    def test_matches_oracle(self, rng):
        for _ in range(5):
            a = random_descriptors(rng, 13)
            b = random_descriptors(rng, 7)
            b[0] = flip_bits(a[0], [3, 5])
            assert exact_image_similarity(a, b) == pytest.approx(
                oracles.exact_similarity(a, b), rel=1e-12)

    def test_empty_rejected(self, rng):
        empty = np.empty((0, 4), dtype=np.uint64)
        with pytest.raises(ValueError):
            exact_image_similarity(empty, random_descriptors(rng, 1))


class TestApproxSimilarity:
    def test_empty_database(self, rng):
        tables = MultiIndexTables()
        result = approx_similarity(tables, random_descriptors(rng, 3))
        assert result.scores.shape == (0,)
        assert result.distances_computed == 0

    def test_empty_query_rejected(self, rng):
        tables = build_tables(random_images(rng, 1, 3))
        with pytest.raises(ValueError):
            approx_similarity(tables, np.empty((0, 4), dtype=np.uint64))

    def test_duplicate_image_equals_exact(self, rng):
        image = random_descriptors(rng, 25)
        tables = build_tables([image])
        result = approx_similarity(tables, image)
        assert result.scores[0] == pytest.approx(
            exact_image_similarity(image, image), rel=1e-12)

    def test_far_images_score_zero(self, rng):
        # random cross-image pairs sit near distance 128: any retrieved
        # pair is beyond the cutoff, so scores must be exactly zero
        tables = build_tables(random_images(rng, 3, 15))
        result = approx_similarity(tables, random_descriptors(rng, 15))
        assert np.array_equal(result.scores, np.zeros(3))

    def test_never_exceeds_exact(self, rng):
        images = random_images(rng, 6, 12)
        images[3][0] = flip_bits(images[1][4], range(20))
        images[5][2] = flip_bits(images[0][0], range(40))
        tables = build_tables(images)
        query = images[5].copy()
        approx = approx_similarity(tables, query).scores
        exact = np.array([
            exact_image_similarity(query, image) for image in images
        ])
        assert (approx <= exact + 1e-12).all()

    def test_matches_collision_oracle(self, rng):
        images = random_images(rng, 8, 10)
        images[4][0] = flip_bits(images[2][3], range(10))
        images[6][1] = flip_bits(images[0][5], range(30))
        tables = build_tables(images)
        query = flip_bits(images[2][3], range(5)).reshape(1, 4)
        query = np.vstack([query, random_descriptors(rng, 9)])
        result = approx_similarity(tables, query)
        expected, _, n_pairs = oracles.collision_scores(
            query, images, 16, 16)
        np.testing.assert_allclose(result.scores, expected, rtol=1e-9,
                                   atol=0)
        assert result.distances_computed == n_pairs

    def test_image_limit(self, rng):
        image = random_descriptors(rng, 10)
        tables = build_tables([image, image, image])
        result = approx_similarity(tables, image, image_limit=2)
        assert result.scores.shape == (2,)
        full = approx_similarity(tables, image)
        np.testing.assert_allclose(result.scores, full.scores[:2],
                                   rtol=1e-12)
        with pytest.raises(ValueError):
            approx_similarity(tables, image, image_limit=4)

    def test_empty_image_scores_zero(self, rng):
        images = [random_descriptors(rng, 5),
                  np.empty((0, 4), dtype=np.uint64),
                  random_descriptors(rng, 5)]
        tables = build_tables(images)
        result = approx_similarity(tables, images[0])
        assert result.scores[1] == 0.0
        assert result.scores[0] > 0.0

    def test_worker_split_is_equivalent(self, rng):
        images = random_images(rng, 5, 40)
        images[2][:10] = images[0][:10]
        tables = build_tables(images)
        query = images[2]
        serial = approx_similarity(tables, query, workers=1)
        threaded = approx_similarity(tables, query, workers=3)
        np.testing.assert_allclose(threaded.scores, serial.scores,
                                   rtol=1e-12)
        assert threaded.distances_computed == serial.distances_computed

    def test_backend_parity(self, rng, each_backend):
        images = random_images(rng, 6, 20)
        images[4][:8] = images[1][:8]
        tables = build_tables(images)
        result = approx_similarity(tables, images[4])
        expected, _, n_pairs = oracles.collision_scores(
            images[4], images, 16, 16)
        np.testing.assert_allclose(result.scores, expected, rtol=1e-9,
                                   atol=0)
        assert result.distances_computed == n_pairs


class TestExactVector:
    def test_matches_pairwise_exact(self, rng):
        images = random_images(rng, 5, 8)
        images[1][0] = flip_bits(images[0][0], [7])
        tables = build_tables(images)
        arrays = tables.query_arrays()
        query = images[4]
        result = exact_similarity_vector(
            query, arrays["store"][:tables.n_features],
            arrays["feat_image"][:tables.n_features], 3,
            tables.feature_counts)
        assert result.scores.shape == (3,)
        assert result.distances_computed == query.shape[0] * 3 * 8
        for k in range(3):
            assert result.scores[k] == pytest.approx(
                exact_image_similarity(query, images[k]), rel=1e-12)
