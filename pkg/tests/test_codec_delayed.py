import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import rates, sequences
from oracles import ListBits, alg1_delivery_blocks, count, d_prime, d_star
from relaysec.bitsource import SeededBits
from relaysec.channel import BlockKind, ChannelState, StateSequence
from relaysec.codec_delayed import (
    DATA,
    KEYGEN,
    RETRANSMIT,
    DelayedEncoderState,
    KeyQueue,
    decode_delayed,
    encoder_step,
    end_of_block_update,
    run_encoder_delayed,
)
from relaysec.codec_zero import DecodeError, IncompleteError, split_message
from relaysec.delay import RateSpec


def seq_of(pairs):
    return StateSequence.from_pairs(pairs)


def fresh(subs=(0b10,), N=2):
    return DelayedEncoderState(sub_messages=tuple(subs), N=N)


def test_step_empty_queues_sends_random_packet():
    st_ = fresh()
    src = ListBits(0b01)
    assert encoder_step(st_, src) == 0b01
    assert st_.last_phase == KEYGEN
    assert src.requests == [2]


def test_step_data_xors_three_vectors():
    st_ = fresh()
    st_.queue1.push(0b01)
    st_.queue2.push(0b11)
    assert encoder_step(st_, ListBits(0)) == 0b00
    assert st_.last_phase == DATA


def test_step_retransmission_has_precedence():
    st_ = fresh()
    st_.queue1.push(0b01)
    st_.queue2.push(0b10)
    st_.pending = (0b00, 1, 1, 1)
    assert encoder_step(st_, ListBits(0b11)) == 0b00
    assert st_.last_phase == RETRANSMIT


def test_update_keygen_on_off_banks_in_queue1():
    st_ = fresh()
    encoder_step(st_, ListBits(0b11))
    end_of_block_update(st_, False, ChannelState(1, 0))
    assert st_.queue_lengths == (1, 0)
    assert st_.queue1.head == 0b11


@pytest.mark.parametrize("state", [ChannelState(1, 1), ChannelState(0, 0)])
def test_update_keygen_discarded(state):
    st_ = fresh()
    encoder_step(st_, ListBits(0b11))
    end_of_block_update(st_, False, state)
    assert st_.queue_lengths == (0, 0)


@pytest.mark.parametrize("state, lengths", [
    (ChannelState(1, 0), (2, 1)),
    (ChannelState(0, 1), (1, 2)),
    (ChannelState(1, 1), (1, 1)),
])
def test_update_data_consumes_keys(state, lengths):
    st_ = fresh(subs=(1, 2))
    for k in (1, 2):
        st_.queue1.push(k)
        st_.queue2.push(k)
    encoder_step(st_, ListBits(0))
    end_of_block_update(st_, True, state)
    assert st_.queue_lengths == lengths
    assert st_.i == 2 and st_.pending is None


def test_update_data_on_off_off_keeps_everything():
    st_ = fresh()
    st_.queue1.push(1)
    st_.queue2.push(2)
    x = encoder_step(st_, ListBits(0))
    end_of_block_update(st_, True, ChannelState(0, 0))
    assert st_.queue_lengths == (1, 1)
    assert st_.i == 1
    assert st_.pending[0] == x


def test_queue_pop_empty_is_invariant_violation():
    with pytest.raises(AssertionError):
        KeyQueue().pop()


def test_hand_execution_three_blocks():
    seq = seq_of([(1, 0), (0, 1), (1, 1)])
    rate = RateSpec(1, 1)
    # draws: packet block 1, packet block 2
    src = ListBits(0b10)
    msg = split_message("1", rate, src)
    tr = run_encoder_delayed(msg, seq, src)
    assert [b.phase for b in tr.blocks] == [KEYGEN, KEYGEN, DATA]
    assert [b.x for b in tr.blocks] == [0, 1, 1 ^ 0 ^ 1]
    assert tr.completion_block == 3
    assert tr.ready_blocks == [2]
    assert decode_delayed(tr.y_blocks(), seq, rate) == 1


def test_hand_execution_retransmission():
    seq = seq_of([(1, 0), (0, 1), (0, 0), (1, 0)])
    rate = RateSpec(1, 1)
    src = ListBits(0b01)
    tr = run_encoder_delayed(split_message("0", rate, src), seq, src)
    assert [b.phase for b in tr.blocks] == [KEYGEN, KEYGEN, DATA, RETRANSMIT]
    assert tr.blocks[2].x == tr.blocks[3].x
    assert tr.blocks[2].y is None
    assert tr.completion_block == 4
    assert decode_delayed(tr.y_blocks(), seq, rate) == 0


def test_all_on_on_never_leaves_keygen():
    seq = seq_of([(1, 1)] * 10)
    rate = RateSpec(1, 1)
    src = SeededBits(0)
    with pytest.raises(IncompleteError) as exc:
        run_encoder_delayed(split_message("1", rate, src), seq, src)
    assert all(b.phase == KEYGEN for b in exc.value.transcript.blocks)
    assert exc.value.progress["queue1"] == exc.value.progress["queue2"] == 0


def test_decode_errors():
    seq = seq_of([(1, 0), (0, 1), (1, 1)])
    rate = RateSpec(1, 1)
    with pytest.raises(DecodeError):
        decode_delayed([1, None, 0], seq, rate)
    with pytest.raises(DecodeError):
        decode_delayed([1, 1], seq, rate)
    with pytest.raises(DecodeError):
        decode_delayed([1, 1, 0, 1], seq_of([(1, 0), (0, 1), (0, 0), (1, 1)]), rate)


def test_transcript_carries_phase_and_queues():
    seq = seq_of([(1, 0), (0, 1), (1, 1)])
    src = ListBits(0)
    tr = run_encoder_delayed(split_message("1", RateSpec(1, 1), src), seq, src)
    lines = tr.to_text().splitlines()
    assert lines[1].endswith("key1[1] phase=keygen q1=1 q2=0")
    assert lines[3].endswith("w1^key1[1]^key2[1] phase=data q1=0 q2=0")


def run(seq, rate, seed):
    src = SeededBits(seed)
    value = src.draw(rate.L)
    msg = split_message(value, rate, src)
    try:
        return value, run_encoder_delayed(msg, seq, src), None
    except IncompleteError as exc:
        return value, exc.transcript, exc


@given(sequences(max_size=40), rates(), st.integers(0, 2**32))
def test_delay_bracketing_and_round_trip(seq, rate, seed):
    raw = [tuple(s) for s in seq]
    lo = d_star(raw, rate.S)
    hi = d_prime(raw, lo)
    value, tr, incomplete = run(seq, rate, seed)
    if hi is None:
        assert incomplete is not None
        return
    assert incomplete is None
    assert lo <= tr.completion_block <= hi
    assert tr.completion_block == hi
    assert decode_delayed(tr.y_blocks(), seq, rate) == value


@given(sequences(max_size=40), rates(), st.integers(0, 2**32))
def test_ready_times_and_queue_lengths(seq, rate, seed):
    raw = [tuple(s) for s in seq]
    if d_star(raw, rate.S) is None:
        return
    _, tr, _ = run(seq, rate, seed)
    expected = alg1_delivery_blocks(raw, rate.S)
    assert tr.ready_blocks == expected
    for d, (q1, q2) in zip(tr.ready_blocks, tr.ready_queue_lengths):
        on_off, off_on = count(raw, d, (1, 0)), count(raw, d, (0, 1))
        assert q1 == max(on_off - off_on, 0) + 1
        assert q2 == max(off_on - on_off, 0) + 1


@given(sequences(max_size=40), rates(), st.integers(0, 2**32))
def test_key_discipline(seq, rate, seed):
    _, tr, _ = run(seq, rate, seed)
    banked = {}
    for b in tr.blocks:
        if b.label and b.label[0] == "bank":
            _, q, idx = b.label
            banked[(q, idx)] = b
            # a queue-2 key is never heard by relay 1 and vice versa
            if q == 1:
                assert b.kind is BlockKind.ON_OFF and b.z2 is None
            else:
                assert b.kind is BlockKind.OFF_ON and b.z1 is None
    spent = set()
    for b in tr.blocks:
        if not (b.label and b.label[0] == "data"):
            continue
        _, i, m, n = b.label
        assert (1, m) not in spent and (2, n) not in spent
        assert (1, m) in banked and (2, n) in banked
        if b.kind is BlockKind.ON_OFF:
            spent.add((2, n))
        elif b.kind is BlockKind.OFF_ON:
            spent.add((1, m))
        elif b.kind is BlockKind.ON_ON:
            spent.update({(1, m), (2, n)})
