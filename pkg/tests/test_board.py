import pytest

from petvote.board import Board, BoardError, GENESIS_HASH, verify_board_file
from petvote.rng import Rng


def make_board(entries=5):
    board = Board()
    board.append("params", {"group": "23 11 4"})
    for i in range(entries - 1):
        board.append("ballot", {"voter_id": f"V{i}", "w": [4, 18]})
    return board


def test_first_entry_genesis():
    board = make_board(1)
    assert board.entries[0].prev_hash == GENESIS_HASH
    assert board.entries[0].seq == 0


def test_chaining():
    board = make_board(3)
    assert board.entries[1].prev_hash == board.entries[0].entry_hash
    assert board.entries[2].prev_hash == board.entries[1].entry_hash
    assert board.verify_chain()


def test_unknown_kind_rejected():
    board = Board()
    with pytest.raises(BoardError):
        board.append("gossip", {})


def test_payload_mutation_detected():
    board = make_board(4)
    entry = board.entries[2]
    board.entries[2] = type(entry)(
        seq=entry.seq,
        kind=entry.kind,
        payload=entry.payload.replace("V1", "V9"),
        prev_hash=entry.prev_hash,
        entry_hash=entry.entry_hash,
    )
    assert not board.verify_chain()


def test_reorder_detected():
    board = make_board(4)
    board.entries[1], board.entries[2] = board.entries[2], board.entries[1]
    assert not board.verify_chain()


def test_read_all_filter():
    board = make_board(4)
    assert len(board.read_all("ballot")) == 3
    assert len(board.read_all("params")) == 1
    assert len(board.read_all()) == 4


def test_save_load_roundtrip(tmp_path):
    board = make_board(6)
    path = tmp_path / "board.log"
    board.save(path)
    loaded = Board.load(path)
    assert loaded.entries == board.entries
    assert loaded.verify_chain()
    assert verify_board_file(path)


def test_file_tamper_detected(tmp_path):
    board = make_board(6)
    path = tmp_path / "board.log"
    board.save(path)
    raw = bytearray(path.read_bytes())
    raw[len(raw) // 2] ^= 0x01
    path.write_bytes(bytes(raw))
    assert not verify_board_file(path)


def test_random_single_byte_mutations_detected(tmp_path):
    board = make_board(8)
    path = tmp_path / "board.log"
    board.save(path)
    original = path.read_bytes()
    rng = Rng("board-mutations")
    for _ in range(100):
        pos = rng.randrange(len(original))
        new_byte = rng.randrange(256)
        while new_byte == original[pos]:
            new_byte = rng.randrange(256)
        mutated = bytearray(original)
        mutated[pos] = new_byte
        path.write_bytes(bytes(mutated))
        assert not verify_board_file(path)
    path.write_bytes(original)
    assert verify_board_file(path)
