"""Network graph contracts: shapes, ranges, normalization, gradients, checkpoints."""

import numpy as np
import pytest
import torch

from scenestudio.data import AttributeVector, SemanticLayout
from scenestudio.errors import CheckpointError, ContractError
from scenestudio.nets import (DiscriminatorPyramid, DiscriminatorSpec, GeneratorSpec,
                              MatchAwareDiscriminator, SceneGenerator, build_pyramid,
                              forward_discriminator, forward_generator, image_pyramid,
                              layout_planes_pyramid, layout_to_planes, load_checkpoint,
                              mean_pool2, noise_response_by_class, replicate_attributes,
                              restore_discriminators, restore_generator, sample_noise,
                              save_checkpoint, spec_hash)
from scenestudio.nets.checkpoint import write_bundle
from scenestudio.nets.layers import replicate_attribute_map

DESK = GeneratorSpec.desk(fine_resolution=64, num_classes=6, num_attributes=8,
                          scale_divisor=8, layout_bits=4)
DESK_D = DiscriminatorSpec.desk(num_attributes=8, layout_bits=4, scale_divisor=8)


def make_generator(seed=0, spec=DESK):
    torch.manual_seed(seed)
    return SceneGenerator(spec)


def random_inputs(spec, batch=2, seed=0):
    rng = np.random.default_rng(seed)
    z = torch.from_numpy(rng.standard_normal(
        (batch, spec.noise_channels, spec.fine_resolution, spec.fine_resolution)).astype(np.float32))
    labels = rng.integers(0, spec.num_classes,
                          (batch, spec.fine_resolution, spec.fine_resolution), dtype=np.int64)
    planes = np.stack([
        layout_to_planes(SemanticLayout(labels=l, num_classes=spec.num_classes), spec.layout_bits)
        for l in labels])
    attrs = torch.from_numpy(rng.uniform(0, 1, (batch, spec.num_attributes)).astype(np.float32))
    return z, torch.from_numpy(planes), attrs, labels


class TestGeneratorShapes:
    def test_output_resolutions(self):
        gen = make_generator()
        z, planes, attrs, _ = random_inputs(DESK)
        coarse, fine = gen(z, planes, attrs)
        assert coarse.shape == (2, 3, 32, 32)
        assert fine.shape == (2, 3, 64, 64)

    def test_outputs_in_tanh_range(self):
        gen = make_generator()
        z, planes, attrs, _ = random_inputs(DESK)
        coarse, fine = gen(z, planes, attrs)
        for img in (coarse, fine):
            assert img.min() >= -1.0 and img.max() <= 1.0

    def test_full_scale_channel_plan(self):
        spec = GeneratorSpec.full_scale()
        assert spec.coarse_widths == (64, 128, 256, 512)
        assert spec.fine_widths == (32, 64)
        assert spec.base_resolution == 256
        # desk divisor shrinks every width by the same factor
        assert DESK.coarse_widths == (8, 16, 32, 64)
        assert DESK.fine_widths == (4, 8)

    def test_single_sample_wrapper(self):
        gen = make_generator()
        rng = np.random.default_rng(3)
        labels = rng.integers(0, 6, (64, 64), dtype=np.int64)
        layout = SemanticLayout(labels=labels, num_classes=6)
        attrs = AttributeVector(values=np.full(8, 0.5))
        z = sample_noise(rng, DESK)
        coarse, fine = forward_generator(gen, z, layout, attrs)
        assert coarse.shape == (32, 32, 3) and fine.shape == (64, 64, 3)
        assert coarse.dtype == np.float32

    def test_wrapper_rejects_mismatched_inputs(self):
        gen = make_generator()
        rng = np.random.default_rng(3)
        layout = SemanticLayout(labels=np.zeros((32, 32), dtype=np.int64), num_classes=6)
        attrs = AttributeVector(values=np.full(8, 0.5))
        with pytest.raises(ContractError):
            forward_generator(gen, sample_noise(rng, DESK), layout, attrs)
        layout64 = SemanticLayout(labels=np.zeros((64, 64), dtype=np.int64), num_classes=6)
        with pytest.raises(ContractError):
            forward_generator(gen, np.zeros((64, 64, 7), dtype=np.float32), layout64, attrs)
        with pytest.raises(ContractError):
            forward_generator(gen, sample_noise(rng, DESK), layout64,
                              AttributeVector(values=np.full(5, 0.5), names=("a", "b", "c", "d", "e")))

    def test_distinct_noise_gives_distinct_images(self):
        gen = make_generator()
        rng = np.random.default_rng(5)
        labels = rng.integers(0, 6, (64, 64), dtype=np.int64)
        layout = SemanticLayout(labels=labels, num_classes=6)
        attrs = AttributeVector(values=np.full(8, 0.5))
        _, fine_a = forward_generator(gen, sample_noise(rng, DESK), layout, attrs)
        _, fine_b = forward_generator(gen, sample_noise(rng, DESK), layout, attrs)
        assert np.abs(fine_a - fine_b).max() > 1e-4

    def test_noise_response_diagnostic(self):
        gen = make_generator()
        labels = np.zeros((64, 64), dtype=np.int64)
        labels[32:] = 1
        layout = SemanticLayout(labels=labels, num_classes=6)
        attrs = AttributeVector(values=np.full(8, 0.5))
        response = noise_response_by_class(gen, layout, attrs, n_draws=8, seed=0)
        assert set(response) == {0, 1}
        assert all(v >= 0 for v in response.values())


class TestDeterminism:
    def test_same_seed_same_network(self):
        z, planes, attrs, _ = random_inputs(DESK)
        out1 = make_generator(seed=42)(z, planes, attrs)
        out2 = make_generator(seed=42)(z, planes, attrs)
        for a, b in zip(out1, out2):
            assert torch.equal(a, b)

    def test_different_seed_different_network(self):
        z, planes, attrs, _ = random_inputs(DESK)
        _, fine1 = make_generator(seed=1)(z, planes, attrs)
        _, fine2 = make_generator(seed=2)(z, planes, attrs)
        assert not torch.equal(fine1, fine2)

    def test_batch_equivariance(self):
        # instance norm is per-sample, so batching must not change any output
        gen = make_generator().double()
        z, planes, attrs, _ = random_inputs(DESK, batch=3)
        z, planes, attrs = z.double(), planes.double(), attrs.double()
        with torch.no_grad():
            _, fine_batch = gen(z, planes, attrs)
            for i in range(3):
                _, fine_one = gen(z[i:i + 1], planes[i:i + 1], attrs[i:i + 1])
                assert torch.allclose(fine_batch[i], fine_one[0], atol=1e-10)


class TestInstanceNormInvariant:
    def _check_module(self, module, run):
        captured = []

        def hook(_mod, _inp, out):
            # clone: the module's follow-up activation runs in place on `out`
            captured.append(out.detach().clone())

        handles = [m.register_forward_hook(hook) for m in module.modules()
                   if isinstance(m, torch.nn.InstanceNorm2d)]
        try:
            run()
        finally:
            for h in handles:
                h.remove()
        assert captured, "no normalization layers fired"
        for out in captured:
            flat = out.double().reshape(out.shape[0], out.shape[1], -1)
            mean = flat.mean(dim=2)
            var = flat.var(dim=2, unbiased=False)
            assert mean.abs().max().item() < 1e-4
            assert (var - 1).abs().max().item() < 1e-4

    def test_generator_normalized_activations(self):
        gen = make_generator().double()
        z, planes, attrs, _ = random_inputs(DESK)
        self._check_module(gen, lambda: gen(z.double(), planes.double(), attrs.double()))

    def test_discriminator_normalized_activations(self):
        torch.manual_seed(0)
        disc = MatchAwareDiscriminator(DESK_D).double()
        rng = np.random.default_rng(0)
        img = torch.from_numpy(rng.uniform(-1, 1, (2, 3, 64, 64))).double()
        planes = torch.from_numpy(
            rng.integers(0, 2, (2, 4, 64, 64)).astype(np.float64))
        attrs = torch.from_numpy(rng.uniform(0, 1, (2, 8))).double()
        self._check_module(disc, lambda: disc(img, attrs, planes))

    def test_no_norm_on_final_generator_layer(self):
        gen = make_generator()
        assert isinstance(gen.coarse.to_image, torch.nn.ConvTranspose2d)
        assert isinstance(gen.fine.to_image, torch.nn.ConvTranspose2d)

    def test_no_norm_on_discriminator_input_layers(self):
        disc = MatchAwareDiscriminator(DESK_D)
        for stream in (disc.image_stream, disc.condition_stream):
            assert isinstance(stream[0], torch.nn.Conv2d)
            assert isinstance(stream[1], torch.nn.LeakyReLU)


class TestGradients:
    def test_gradient_reaches_every_parameter(self):
        gen = make_generator()
        z, planes, attrs, _ = random_inputs(DESK)
        coarse, fine = gen(z, planes, attrs)
        (coarse.sum() + fine.sum()).backward()
        for name, p in gen.named_parameters():
            assert p.grad is not None, name
            assert p.grad.abs().sum() > 0, name

    def test_attribute_gradient_matches_finite_differences(self):
        # truncated double-precision config; central differences vs autograd
        spec = GeneratorSpec(fine_resolution=32, num_classes=4, num_attributes=3,
                             layout_bits=2, noise_channels=2, scale_divisor=16,
                             coarse_blocks=1, fine_blocks=1)
        torch.manual_seed(0)
        gen = SceneGenerator(spec).double()
        rng = np.random.default_rng(1)
        z = torch.from_numpy(rng.standard_normal((1, 2, 32, 32)))
        labels = rng.integers(0, 4, (32, 32), dtype=np.int64)
        planes = torch.from_numpy(layout_to_planes(
            SemanticLayout(labels=labels, num_classes=4), 2)).double()[None]
        attrs = torch.from_numpy(rng.uniform(0.2, 0.8, (1, 3))).requires_grad_(True)

        def loss_of(a):
            coarse, fine = gen(z, planes, a)
            return coarse.square().sum() + fine.square().sum()

        loss = loss_of(attrs)
        loss.backward()
        analytic = attrs.grad.detach().numpy()[0]
        eps = 1e-6
        for i in range(3):
            bump = torch.zeros_like(attrs.detach())
            bump[0, i] = eps
            with torch.no_grad():
                hi = loss_of(attrs.detach() + bump).item()
                lo = loss_of(attrs.detach() - bump).item()
            fd = (hi - lo) / (2 * eps)
            rel = abs(fd - analytic[i]) / max(abs(fd), abs(analytic[i]), 1e-12)
            assert rel < 1e-4, f"attr {i}: fd={fd} analytic={analytic[i]}"

    def test_replicated_attribute_gradient_is_area(self):
        # summing an (H, W) replication of a makes d(sum)/da_j = H * W exactly
        attrs = torch.tensor([[0.3, 0.7]], dtype=torch.float64, requires_grad=True)
        replicate_attribute_map(attrs, 5, 7).sum().backward()
        assert torch.allclose(attrs.grad, torch.full((1, 2), 35.0, dtype=torch.float64))


class TestDiscriminator:
    def test_score_in_unit_interval(self):
        torch.manual_seed(0)
        disc = MatchAwareDiscriminator(DESK_D)
        rng = np.random.default_rng(0)
        img = rng.uniform(-1, 1, (64, 64, 3)).astype(np.float32)
        layout = SemanticLayout(labels=rng.integers(0, 6, (64, 64), dtype=np.int64),
                                num_classes=6)
        attrs = AttributeVector(values=rng.uniform(0, 1, 8))
        score = forward_discriminator(disc, img, attrs, layout)
        assert 0.0 <= score <= 1.0

    def test_zeroed_score_head_gives_exactly_half(self):
        torch.manual_seed(0)
        disc = MatchAwareDiscriminator(DESK_D)
        torch.nn.init.zeros_(disc.score_head.weight)
        torch.nn.init.zeros_(disc.score_head.bias)
        rng = np.random.default_rng(1)
        img = rng.uniform(-1, 1, (64, 64, 3)).astype(np.float32)
        layout = SemanticLayout(labels=rng.integers(0, 6, (64, 64), dtype=np.int64),
                                num_classes=6)
        attrs = AttributeVector(values=rng.uniform(0, 1, 8))
        assert forward_discriminator(disc, img, attrs, layout) == pytest.approx(0.5, abs=0)

    def test_small_inputs_are_accepted(self):
        # smallest desk pyramid level is 8 px; the input pad keeps the stack valid
        torch.manual_seed(0)
        disc = MatchAwareDiscriminator(DESK_D)
        img = torch.zeros(1, 3, 8, 8)
        planes = torch.zeros(1, 4, 8, 8)
        attrs = torch.full((1, 8), 0.5)
        score = disc(img, attrs, planes)
        assert score.shape == (1,) and 0 <= score.item() <= 1

    def test_pyramid_wrapper_runs_three_scales(self):
        torch.manual_seed(0)
        pyramid = DiscriminatorPyramid(DESK_D)
        rng = np.random.default_rng(2)
        img = torch.from_numpy(rng.uniform(-1, 1, (2, 3, 64, 64)).astype(np.float32))
        labels = rng.integers(0, 6, (2, 64, 64), dtype=np.int64)
        images = image_pyramid(img)
        planes = [torch.from_numpy(p) for p in layout_planes_pyramid(labels, 4, 6)]
        scores = pyramid(images, torch.full((2, 8), 0.5), planes)
        assert [s.shape for s in scores] == [(2,)] * 3
        with pytest.raises(ContractError):
            pyramid(images[:2], torch.full((2, 8), 0.5), planes)

    def test_layout_pyramid_levels_are_binary_and_scaled(self):
        labels = np.zeros((1, 64, 64), dtype=np.int64)
        labels[0, :32] = 5
        levels = layout_planes_pyramid(labels, bits=4, num_classes=6)
        assert [lv.shape for lv in levels] == [(1, 4, 64, 64), (1, 4, 32, 32), (1, 4, 16, 16)]
        for lv in levels:
            assert set(np.unique(lv)) <= {0.0, 1.0}
        # 5 = 0101 in MSB-first planes
        assert levels[2][0, :, 0, 0].tolist() == [0.0, 1.0, 0.0, 1.0]


class TestPyramidOps:
    def test_mean_pool_preserves_global_mean(self):
        rng = np.random.default_rng(0)
        img = rng.uniform(-1, 1, (64, 64, 3)).astype(np.float32)
        levels = build_pyramid(img)
        means = [lv.mean() for lv in levels]
        assert means[1] == pytest.approx(means[0], abs=1e-6)
        assert means[2] == pytest.approx(means[0], abs=1e-6)

    def test_pool_matches_hand_computation(self):
        img = np.arange(16, dtype=np.float64).reshape(4, 4, 1)
        pooled = mean_pool2(img)
        assert pooled[0, 0, 0] == pytest.approx((0 + 1 + 4 + 5) / 4)
        assert pooled[1, 1, 0] == pytest.approx((10 + 11 + 14 + 15) / 4)

    def test_pyramid_shapes_and_validation(self):
        img = np.zeros((64, 64, 3), dtype=np.float32)
        assert [lv.shape for lv in build_pyramid(img)] == [(64, 64, 3), (32, 32, 3), (16, 16, 3)]
        with pytest.raises(ContractError):
            build_pyramid(np.zeros((6, 6, 3), dtype=np.float32))

    def test_replicate_attributes_tiles_vector(self):
        out = replicate_attributes(np.array([0.1, 0.9]), 3, 4)
        assert out.shape == (3, 4, 2)
        assert np.all(out[..., 0] == 0.1) and np.all(out[..., 1] == 0.9)


class TestCheckpoints:
    def test_round_trip_restores_outputs(self, tmp_path):
        gen = make_generator(seed=9)
        torch.manual_seed(9)
        disc = DiscriminatorPyramid(DESK_D)
        path = tmp_path / "model.ckpt"
        save_checkpoint(path, gen, disc, meta={"phase": "fine", "epoch": 3})
        bundle = load_checkpoint(path)
        assert bundle.meta == {"phase": "fine", "epoch": 3}
        restored = restore_generator(bundle)
        z, planes, attrs, _ = random_inputs(DESK)
        with torch.no_grad():
            _, fine_a = gen(z, planes, attrs)
            _, fine_b = restored(z, planes, attrs)
        assert torch.equal(fine_a, fine_b)
        assert restore_discriminators(bundle) is not None

    def test_save_load_save_is_byte_identical(self, tmp_path):
        gen = make_generator(seed=4)
        p1, p2 = tmp_path / "a.ckpt", tmp_path / "b.ckpt"
        save_checkpoint(p1, gen, meta={"seed": 4})
        write_bundle(p2, load_checkpoint(p1))
        assert p1.read_bytes() == p2.read_bytes()

    def test_tampered_header_rejected(self, tmp_path):
        gen = make_generator()
        path = tmp_path / "m.ckpt"
        save_checkpoint(path, gen)
        raw = bytearray(path.read_bytes())
        idx = raw.find(b'"fine_resolution":64')
        raw[idx:idx + len(b'"fine_resolution":64')] = b'"fine_resolution":32'
        path.write_bytes(bytes(raw))
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_truncated_file_rejected(self, tmp_path):
        gen = make_generator()
        path = tmp_path / "m.ckpt"
        save_checkpoint(path, gen)
        path.write_bytes(path.read_bytes()[:-100])
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_wrong_magic_rejected(self, tmp_path):
        path = tmp_path / "m.ckpt"
        path.write_bytes(b"not a checkpoint at all")
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_spec_mismatch_rejected(self, tmp_path):
        gen = make_generator()
        path = tmp_path / "m.ckpt"
        save_checkpoint(path, gen)
        bundle = load_checkpoint(path)
        other = GeneratorSpec.desk(fine_resolution=128, num_classes=6,
                                   num_attributes=8, scale_divisor=8, layout_bits=4)
        with pytest.raises(CheckpointError):
            restore_generator(bundle, expected_spec=other)

    def test_spec_hash_is_stable(self):
        assert spec_hash(DESK, DESK_D) == spec_hash(DESK, DESK_D)
        assert spec_hash(DESK, DESK_D) != spec_hash(GeneratorSpec.full_scale(), DESK_D)
