from casevec.bpe import SPECIALS, SubwordTokenizer

CORPUS = [
    "the shipment of the container was delayed at the wharf",
    "the container shipment incurred demurrage at the wharf",
    "demurrage charges attach when the consignee delays the container",
]


class TestTraining:
    def test_specials_take_low_ids(self):
        tok = SubwordTokenizer.train(CORPUS, n_merges=50)
        for i, name in enumerate(SPECIALS):
            assert tok.vocab[name] == i

    def test_training_is_deterministic(self):
        a = SubwordTokenizer.train(CORPUS, n_merges=80)
        b = SubwordTokenizer.train(list(CORPUS), n_merges=80)
        assert a.vocab == b.vocab and a.merges == b.merges

    def test_merges_respect_word_boundaries(self):
        tok = SubwordTokenizer.train(CORPUS, n_merges=100)
        for merged in ("".join(m) for m in tok.merges):
            assert " " not in merged

    def test_frequent_word_becomes_single_token(self):
        tok = SubwordTokenizer.train(CORPUS, n_merges=200)
        assert len(tok.encode("the")) == 1


class TestEncoding:
    def test_encode_deterministic(self):
        tok = SubwordTokenizer.train(CORPUS, n_merges=60)
        text = "the consignee disputed the demurrage"
        assert tok.encode(text) == tok.encode(text)

    def test_unseen_characters_map_to_unk(self):
        tok = SubwordTokenizer.train(["abc abc"], n_merges=10)
        ids = tok.encode("xyz")
        assert ids[:3] == [tok.unk_id] * 3  # trailing id is the boundary symbol

    def test_empty_text(self):
        tok = SubwordTokenizer.train(CORPUS, n_merges=10)
        assert tok.encode("") == []

    def test_round_trip_through_dict(self):
        tok = SubwordTokenizer.train(CORPUS, n_merges=60)
        clone = SubwordTokenizer.from_dict(tok.to_dict())
        text = "container demurrage at the wharf"
        assert clone.encode(text) == tok.encode(text)
        assert len(clone) == len(tok)
