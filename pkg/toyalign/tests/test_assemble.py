import math

import pytest
import torch

from toyalign.assemble import (
    assemble_stage1_input,
    assemble_stage2_input,
    normalize_segment,
    stage1_loss,
    stage2_logits,
    stage2_loss,
    stats_prompt_text,
)
from toyalign.model import ClassifierHead, MultimodalToyModel, ToyConfig
from toyalign.vocab import TextVocab

from test_model import fd_check

SMALL = ToyConfig(d_ts=4, d_m=5, embed_dim=8, n_layers=1, n_heads=2, max_len=512)


def small_model(channel_ids=("acc_x",), **overrides):
    cfg = ToyConfig(**{**SMALL.to_json_dict(), **overrides})
    return MultimodalToyModel(TextVocab(), list(channel_ids), cfg, seed=0)


def stage1_record(l=6, channel_id="acc_x"):
    return {
        "id": "toy/x/1",
        "channel_id": channel_id,
        "readings": [math.sin(0.7 * i) for i in range(l)],
        "system_prompt": "Sensor QA: %d points at 50Hz." % l,
        "question": "Trends in the sensor data?",
        "answer": "0.0-0.1s: growing.",
    }


def stage2_record(C=1, l=6, label=0):
    return {
        "id": "toy/x/w0",
        "window": [[math.sin(0.5 * i + c) for i in range(l)] for c in range(C)],
        "stats": [{"mean": 0.25, "variance": 1.0} for _ in range(C)],
        "label": label,
    }


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def test_normalize_segment_matches_convention():
    x = torch.tensor([1.0, 2.0, 3.0])
    out = normalize_segment(x)
    assert torch.allclose(out.mean(), torch.tensor(0.0), atol=1e-7)
    assert torch.allclose(out.std(unbiased=False), torch.tensor(1.0), atol=1e-6)
    assert normalize_segment(torch.tensor([4.0, 4.0])).abs().sum() == 0


def test_stats_prompt_two_decimal_fixed():
    text = stats_prompt_text(["acc_x", "acc_y"], [{"mean": 1.0, "variance": 2.345},
                                                  {"mean": -0.5, "variance": 0.0}])
    assert text == ("statistics: acc_x: mean=1.00, variance=2.35; "
                    "acc_y: mean=-0.50, variance=0.00.")


# ---------------------------------------------------------------------------
# stage-1 assembly
# ---------------------------------------------------------------------------

def test_stage1_sensor_block_is_l_plus_3():
    model = small_model()
    for l in range(5, 21):
        item = assemble_stage1_input(model, stage1_record(l=l))
        assert item.sensor_rows == l + 3


def test_stage1_token_count_arithmetic():
    model = small_model()
    record = stage1_record(l=5)
    item = assemble_stage1_input(model, record)
    vocab = model.vocab
    n_text = (
        len(vocab.encode(record["system_prompt"]))
        + len(vocab.encode(record["question"]))
        + len(vocab.encode(record["answer"]))
        + 1  # trailing eos
    )
    assert item.embeddings.shape[0] == n_text + (5 + 3)


def test_stage1_mask_covers_answer_and_eos_only():
    model = small_model()
    record = stage1_record()
    item = assemble_stage1_input(model, record)
    n_answer = len(model.vocab.encode(record["answer"])) + 1
    assert int(item.loss_mask.sum()) == n_answer
    # The masked positions predict exactly the answer ids plus eos.
    predicted = item.targets.roll(-1)[item.loss_mask].tolist()
    assert predicted == model.vocab.encode(record["answer"]) + [model.vocab.eos_id]


def test_stage1_unregistered_channel_errors():
    model = small_model()
    with pytest.raises(KeyError):
        assemble_stage1_input(model, stage1_record(channel_id="gyro"))


# ---------------------------------------------------------------------------
# stage-1 loss
# ---------------------------------------------------------------------------

def test_stage1_uniform_model_loss_is_log_vocab():
    model = small_model(channel_ids=("acc_x", "acc_y")).double()
    with torch.no_grad():
        model.lm.embed.weight.zero_()
        model.special_rows.zero_()
    item = assemble_stage1_input(model, stage1_record())
    loss = stage1_loss(model, [item]).detach()
    expected = math.log(model.extended_vocab_size)  # 4100
    assert float(loss) == pytest.approx(expected, rel=1e-9)


def test_stage1_mask_reduction_to_single_token():
    model = small_model().double()
    item = assemble_stage1_input(model, stage1_record())
    position = int(torch.nonzero(item.loss_mask)[3])
    single_mask = torch.zeros_like(item.loss_mask)
    single_mask[position] = True
    item_single = type(item)(
        embeddings=item.embeddings, targets=item.targets, loss_mask=single_mask,
        sensor_rows=item.sensor_rows,
    )
    loss = stage1_loss(model, [item_single]).detach()
    with torch.no_grad():
        hidden = model.lm.hidden_states(item.embeddings.unsqueeze(0))
        logits = model.logits(hidden[0, position])
        target = int(item.targets[position + 1])
        expected = -torch.log_softmax(logits, dim=-1)[target]
    assert float(loss) == pytest.approx(float(expected), rel=1e-9)


def test_stage1_empty_mask_is_error():
    model = small_model()
    item = assemble_stage1_input(model, stage1_record())
    item.loss_mask[:] = False
    with pytest.raises(ValueError):
        stage1_loss(model, [item])
    with pytest.raises(ValueError):
        stage1_loss(model, [])


def test_stage1_loss_gradient_matches_finite_differences():
    model = small_model().double()
    record = stage1_record(l=5)

    def loss_fn():
        return stage1_loss(model, [assemble_stage1_input(model, record)])

    worst = fd_check(model.trainable_parameters(), loss_fn, n_coords=8)
    assert worst <= 1e-4


# ---------------------------------------------------------------------------
# stage-2 assembly
# ---------------------------------------------------------------------------

def expected_stats_rows(model, record):
    channel_ids = list(model.specials.channel_ids)
    return len(model.vocab.encode(stats_prompt_text(channel_ids, record["stats"])))


@pytest.mark.parametrize("C", [1, 3, 6])
def test_stage2_rows_formula(C):
    model = small_model(channel_ids=[f"ch{i}" for i in range(C)])
    for l in (5, 12, 20):
        record = stage2_record(C=C, l=l)
        item = assemble_stage2_input(model, record)
        stats_rows = expected_stats_rows(model, record)
        assert item.sensor_rows == C * (l + 3)
        assert item.stat_rows == stats_rows
        assert item.embeddings.shape[0] == C * (l + 3) + stats_rows


def test_stage2_prompts_off_empties_stats_block():
    model = small_model(use_stats_prompt=False)
    item = assemble_stage2_input(model, stage2_record(C=1, l=4))
    assert item.stat_rows == 0
    assert item.embeddings.shape[0] == 1 * (4 + 3)


def test_stage2_special_tokens_off_gives_l_plus_1_rows():
    C, l = 2, 4
    model = small_model(channel_ids=("a", "b"), use_special_tokens=False,
                        use_stats_prompt=False)
    item = assemble_stage2_input(model, stage2_record(C=C, l=l))
    assert item.embeddings.shape[0] == C * (l + 1)


def test_stage2_channel_count_mismatch_errors():
    model = small_model(channel_ids=("a", "b"))
    with pytest.raises(ValueError):
        assemble_stage2_input(model, stage2_record(C=3))


# ---------------------------------------------------------------------------
# stage-2 loss
# ---------------------------------------------------------------------------

def test_stage2_uniform_logits_loss_is_log_classes():
    model = small_model().double()
    head = ClassifierHead(SMALL.embed_dim, num_classes=7).double()
    with torch.no_grad():
        head.fc.weight.zero_()
        head.fc.bias.zero_()
    loss = stage2_loss(model, head, [assemble_stage2_input(model, stage2_record(label=3))])
    assert float(loss.detach()) == pytest.approx(math.log(7), rel=1e-9)


def test_stage2_label_out_of_range():
    model = small_model()
    head = ClassifierHead(SMALL.embed_dim, num_classes=3)
    with pytest.raises(ValueError):
        stage2_loss(model, head, [assemble_stage2_input(model, stage2_record(label=5))])


def test_stage2_permutation_symmetry():
    model = small_model().double()
    head = ClassifierHead(SMALL.embed_dim, num_classes=3, seed=1).double()
    items = [assemble_stage2_input(model, stage2_record(l=7, label=i % 3)) for i in range(4)]
    base = float(stage2_loss(model, head, items).detach())

    perm = [2, 0, 1]
    permuted_head = ClassifierHead(SMALL.embed_dim, num_classes=3).double()
    with torch.no_grad():
        permuted_head.fc.weight.copy_(head.fc.weight[perm])
        permuted_head.fc.bias.copy_(head.fc.bias[perm])
    permuted_items = [
        type(item)(embeddings=item.embeddings, label=perm.index(item.label),
                   sensor_rows=item.sensor_rows, stat_rows=item.stat_rows)
        for item in items
    ]
    # perm maps new-index -> old-class; relabel so pairs stay consistent.
    permuted = float(stage2_loss(model, permuted_head, permuted_items).detach())
    assert permuted == pytest.approx(base, rel=1e-12)


def test_stage2_loss_gradient_matches_finite_differences():
    model = small_model().double()
    head = ClassifierHead(SMALL.embed_dim, num_classes=3, seed=2).double()
    records = [stage2_record(l=5, label=0), stage2_record(l=6, label=2)]

    def loss_fn():
        return stage2_loss(model, head, [assemble_stage2_input(model, r) for r in records])

    params = [*model.trainable_parameters(), *head.parameters()]
    worst = fd_check(params, loss_fn, n_coords=6)
    assert worst <= 1e-4


def test_stage2_logits_shape():
    model = small_model()
    head = ClassifierHead(SMALL.embed_dim, num_classes=3)
    items = [assemble_stage2_input(model, stage2_record(l=5)) for _ in range(2)]
    assert stage2_logits(model, head, items).shape == (2, 3)
