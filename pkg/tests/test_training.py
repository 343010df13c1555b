"""Tests for the training loop, evaluation pass, and prediction."""

import numpy as np
import pytest

from reviewlab.checkpoint import ModelBundle
from reviewlab.errors import InputError
from reviewlab.nn import BiLstmClassifier
from reviewlab.tensor import SeededRng
from reviewlab.textprep import PAD_INDEX, build_vocab, random_embeddings
from reviewlab.toydata import toy_config, toy_reviews
from reviewlab.training import (
    RECOMMENDATION_CLASSES,
    LabeledSplit,
    TrainConfig,
    TrainData,
    build_training_data,
    evaluate,
    predict,
    predict_probabilities,
    task_labels,
    train,
    write_history_csv,
)


def prepared_toy(task="recommendation", **overrides):
    config = toy_config(task=task)
    if overrides:
        config = TrainConfig(**{**config.as_dict(), **overrides})
    prep = build_training_data(toy_reviews(), config)
    emb = random_embeddings(len(prep.vocab), config.embedding_dim, SeededRng(config.seed + 1))
    return config, prep, emb


class TestTrainConfig:
    def test_reference_defaults(self):
        config = TrainConfig()
        assert config.batch_size == 256
        assert config.cell_size == 256
        assert config.dropout_rate == 0.50
        assert config.epochs == 32
        assert config.learning_rate == 1e-3

    def test_task_class_spaces(self):
        assert TrainConfig(task="recommendation").n_classes == 2
        assert TrainConfig(task="sentiment").n_classes == 3
        assert TrainConfig(task="sentiment").class_names == ("negative", "neutral", "positive")

    def test_invalid_fields_rejected(self):
        with pytest.raises(ValueError, match="dropout_rate"):
            TrainConfig(dropout_rate=1.0)
        with pytest.raises(ValueError, match="learning_rate"):
            TrainConfig(learning_rate=0.0)
        with pytest.raises(ValueError, match="batch_size"):
            TrainConfig(batch_size=0)
        with pytest.raises(ValueError, match="epochs"):
            TrainConfig(epochs=-1)
        with pytest.raises(ValueError, match="task"):
            TrainConfig(task="regression")

    def test_as_dict_round_trips(self):
        config = TrainConfig(seed=11, task="sentiment")
        assert TrainConfig(**config.as_dict()) == config


class TestSplitTypes:
    def test_ragged_sequences_rejected(self):
        with pytest.raises(ValueError, match="share one length"):
            LabeledSplit(sequences=((1, 2), (1, 2, 3)), labels=(0, 1))

    def test_label_count_mismatch(self):
        with pytest.raises(ValueError, match="labels"):
            LabeledSplit(sequences=((1, 2),), labels=(0, 1))

    def test_out_of_range_label(self):
        split = LabeledSplit(sequences=((1, 2),), labels=(2,))
        with pytest.raises(ValueError, match="outside"):
            TrainData(train=split, validation=split, n_classes=2,
                      class_names=RECOMMENDATION_CLASSES)


class TestTaskLabels:
    def test_recommendation_uses_flag(self):
        records = toy_reviews(n=6)
        labels, names = task_labels(records, "recommendation")
        assert labels == [1, 0, 1, 0, 1, 0]
        assert names == RECOMMENDATION_CLASSES

    def test_sentiment_uses_lexicon(self):
        records = toy_reviews(n=6)
        labels, names = task_labels(records, "sentiment")
        assert names == ("negative", "neutral", "positive")
        assert labels == [2, 0, 2, 0, 2, 0]

    def test_unknown_task(self):
        with pytest.raises(ValueError, match="task"):
            task_labels([], "ranking")


class TestBuildTrainingData:
    def test_split_sizes(self):
        _, prep, _ = prepared_toy()
        assert len(prep.data.train) == 24
        assert len(prep.data.validation) == 8
        assert len(prep.test) == 8

    def test_vocab_from_training_split_only(self):
        """Tokens confined to validation/test rows never enter the vocabulary."""
        _, prep, _ = prepared_toy()
        config = toy_config()
        records = toy_reviews()
        from reviewlab.dataset import split_60_20_20
        from reviewlab.textprep import clean_text, tokenize

        split = split_60_20_20(records, config.seed)
        train_tokens = set()
        for i in split.train:
            train_tokens.update(tokenize(clean_text(records[i].review_text)))
        assert set(prep.vocab.tokens()) == train_tokens | {"<pad>", "<oov>"}

    def test_dropped_records_counted(self):
        from dataclasses import replace

        records = toy_reviews()
        records[0] = replace(records[0], review_text=None)
        config = toy_config()
        prep = build_training_data(records, config)
        assert prep.dropped == 1
        assert len(prep.data.train) + len(prep.data.validation) + len(prep.test) == 39

    def test_sequences_padded_to_config_length(self):
        config, prep, _ = prepared_toy()
        assert all(len(s) == config.seq_len for s in prep.data.train.sequences)


class TestTrain:
    def test_zero_epochs_returns_initialization(self):
        config, prep, emb = prepared_toy(epochs=0)
        result = train(config, prep.data, emb)
        assert result.history == ()
        init = BiLstmClassifier.build(
            config.cell_size, config.embedding_dim, config.n_classes,
            SeededRng(config.seed),
        )
        for (_, got), (_, want) in zip(result.model.param_blocks(), init.param_blocks()):
            assert np.array_equal(got.a, want.a)
        assert np.array_equal(result.embeddings.table.a, emb.table.a)

    def test_deterministic_history(self):
        config, prep, emb = prepared_toy(epochs=3)
        first = train(config, prep.data, emb)
        second = train(config, prep.data, emb)
        assert first.history == second.history
        for (_, a), (_, b) in zip(first.model.param_blocks(), second.model.param_blocks()):
            assert np.array_equal(a.a, b.a)

    def test_toy_fixture_converges(self):
        """Separable keyword reviews reach 95% training accuracy in 30 epochs."""
        config, prep, emb = prepared_toy()
        result = train(config, prep.data, emb)
        report = evaluate(result.model, result.embeddings, prep.data.train,
                          config.batch_size, config.class_names)
        assert report.accuracy >= 0.95
        first5 = [h.train_loss for h in result.history[:5]]
        assert all(a > b for a, b in zip(first5, first5[1:]))

    def test_history_rows_numbered_from_one(self):
        config, prep, emb = prepared_toy(epochs=2)
        result = train(config, prep.data, emb)
        assert [h.epoch for h in result.history] == [1, 2]

    def test_padding_row_stays_zero(self):
        config, prep, emb = prepared_toy(epochs=2)
        result = train(config, prep.data, emb)
        assert np.all(result.embeddings.table.a[PAD_INDEX] == 0.0)

    def test_empty_training_split_rejected(self):
        config, prep, emb = prepared_toy()
        empty = LabeledSplit(sequences=(), labels=())
        data = TrainData(train=empty, validation=prep.data.validation,
                         n_classes=2, class_names=RECOMMENDATION_CLASSES)
        with pytest.raises(InputError, match="training split"):
            train(config, data, emb)

    def test_embedding_dim_mismatch_rejected(self):
        config, prep, _ = prepared_toy()
        wrong = random_embeddings(60, config.embedding_dim + 1, SeededRng(0))
        with pytest.raises(ValueError, match="embedding dim"):
            train(config, prep.data, wrong)

    def test_class_count_mismatch_rejected(self):
        config, prep, emb = prepared_toy()
        data = TrainData(train=prep.data.train, validation=prep.data.validation,
                         n_classes=3, class_names=("a", "b", "c"))
        with pytest.raises(ValueError, match="classes"):
            train(config, data, emb)


class TestEvaluate:
    def test_report_totals_match_split(self):
        config, prep, emb = prepared_toy(epochs=1)
        result = train(config, prep.data, emb)
        report = evaluate(result.model, result.embeddings, prep.test,
                          config.batch_size, config.class_names)
        assert report.total == len(prep.test)
        assert report.class_names == RECOMMENDATION_CLASSES

    def test_batch_size_does_not_change_probabilities(self):
        config, prep, emb = prepared_toy(epochs=1)
        result = train(config, prep.data, emb)
        one = predict_probabilities(result.model, result.embeddings,
                                    prep.test.sequences, batch_size=1)
        many = predict_probabilities(result.model, result.embeddings,
                                     prep.test.sequences, batch_size=5)
        for a, b in zip(one, many):
            assert a == pytest.approx(b, abs=1e-12)

    def test_empty_split_rejected(self):
        config, prep, emb = prepared_toy(epochs=0)
        result = train(config, prep.data, emb)
        empty = LabeledSplit(sequences=(), labels=())
        with pytest.raises(InputError, match="empty"):
            evaluate(result.model, result.embeddings, empty,
                     config.batch_size, config.class_names)


class TestPredict:
    def bundle(self):
        config, prep, emb = prepared_toy(epochs=2)
        result = train(config, prep.data, emb)
        bundle = ModelBundle(
            task=config.task,
            class_names=config.class_names,
            seq_len=config.seq_len,
            vocab_fingerprint=prep.vocab.fingerprint(),
            model=result.model,
            embeddings=result.embeddings,
        )
        return bundle, prep.vocab

    def test_identical_text_identical_probabilities(self):
        bundle, vocab = self.bundle()
        a = predict(bundle, vocab, "really good dress love it")
        b = predict(bundle, vocab, "really good dress love it")
        assert a == b

    def test_probabilities_sum_to_one(self):
        bundle, vocab = self.bundle()
        p = predict(bundle, vocab, "bad skirt returned it")
        assert sum(p.probabilities.values()) == pytest.approx(1.0, abs=1e-12)
        assert p.label == bundle.class_names[p.label_index]

    def test_empty_text_flagged(self):
        bundle, vocab = self.bundle()
        p = predict(bundle, vocab, "!!!")
        assert p.empty_input
        assert sum(p.probabilities.values()) == pytest.approx(1.0, abs=1e-12)

    def test_vocab_fingerprint_mismatch_rejected(self):
        bundle, _ = self.bundle()
        other = build_vocab([["unrelated", "tokens"]], min_freq=1, max_size=10)
        with pytest.raises(InputError, match="fingerprint"):
            predict(bundle, other, "good dress")


class TestHistoryCsv:
    def test_header_and_rows(self, tmp_path):
        config, prep, emb = prepared_toy(epochs=2)
        result = train(config, prep.data, emb)
        path = tmp_path / "history.csv"
        write_history_csv(result.history, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "epoch,train_loss,val_loss,val_acc"
        assert len(lines) == 3
        cells = lines[1].split(",")
        assert int(cells[0]) == 1
        assert float(cells[1]) == result.history[0].train_loss
