"""End-to-end smoke tests for the python bindings."""

import math

import pytest

import rclab


@pytest.fixture(scope="module")
def vocab():
    return rclab.VocabLayout(64)


@pytest.fixture(scope="module")
def corpus(vocab):
    spec = rclab.CorpusSpec()
    spec.n_examples = 120
    spec.seed = 7
    return rclab.generate_corpus(spec)


def test_corpus_shape_and_ranking(vocab, corpus):
    assert len(corpus) == 120
    oracle = rclab.QualityOracle(vocab, 7)
    for ex in corpus[:20]:
        assert oracle.score(ex.prompt.base, ex.chosen) > oracle.score(
            ex.prompt.base, ex.rejected
        )
        assert ex.true_quality_chosen > ex.true_quality_rejected


def test_corpus_bias_calibration(vocab, corpus):
    frac = rclab.chosen_longer_fraction(vocab, corpus)
    assert abs(frac - 0.5978) < 2.0 / math.sqrt(len(corpus))


def test_split_sizes(corpus):
    splits = rclab.split_corpus(corpus, rclab.SplitFractions(), seed=7)
    assert (len(splits.sft), len(splits.rm), len(splits.eval)) == (32, 76, 12)


def test_rc_builder_arm_invariants(vocab, corpus):
    built = rclab.build_rc_dataset(vocab, corpus, seed=3)
    assert built.examples
    for rc in built.examples:
        if rc.arm == rclab.RcArm.ChosenArm:
            assert rc.preferred_prompt.constraint is None
            c = rc.dispreferred_prompt.constraint
            assert c is not None and not c.satisfied_by(vocab, rc.response)
        else:
            c = rc.preferred_prompt.constraint
            assert c is not None and c.satisfied_by(vocab, rc.response)
            assert rc.dispreferred_prompt.constraint is None


def test_sweep_ladder_frozen_values():
    assert rclab.sweep_word_nums(100, 160) == [80, 90, 100, 120, 140, 160, 170, 180]
    assert rclab.sweep_word_nums(50, 53) == [30, 40, 50, 51, 52, 53, 63, 73]


def test_scorer_training_reduces_loss(vocab, corpus):
    config = rclab.TrainConfig()
    config.epochs = 3
    config.seed = 5
    built = rclab.build_rc_dataset(vocab, corpus, seed=3)
    result = rclab.train_scorer_rc(
        vocab, corpus, built.examples, config, rclab.ObjectiveConfig(), 8
    )
    assert result.log[-1].loss < result.log[0].loss
    report = rclab.eval_accuracy(vocab, result.params, corpus, "train")
    assert 0.0 <= report.accuracy <= 1.0


def test_jsonl_round_trip(vocab, corpus):
    text = rclab.corpus_to_jsonl(corpus)
    back = rclab.corpus_from_jsonl(vocab, text)
    assert len(back) == len(corpus)
    assert back[0].chosen == corpus[0].chosen
    assert back[0].prompt == corpus[0].prompt


def test_checkpoint_round_trip(tmp_path, vocab):
    params = rclab.init_scorer(53, 4, seed=9)
    path = tmp_path / "scorer.json"
    rclab.save_scorer(path, params, seed=9)
    loaded = rclab.load_scorer(path)
    feats = rclab.featurize(vocab, rclab.AugmentedPrompt([2, 4, 6]), [1, 3, 5])
    assert rclab.score(loaded, feats) == rclab.score(params, feats)


def test_policy_joint_decomposition():
    policy = rclab.init_policy(16, 4, seed=2)
    prompt, response = [3, 1, 2], [5, 4]
    joint = rclab.logprob_joint(policy, prompt, response)
    split = rclab.logprob_marginal(policy, prompt) + rclab.logprob_cond(
        policy, prompt, response
    )
    assert joint == pytest.approx(split, abs=1e-12)


def test_bt_prob_complement_exact():
    for d in (-5.0, -0.3, 0.0, 0.7, 12.0):
        assert rclab.bt_prob(d, 0.0) + rclab.bt_prob(0.0, d) == 1.0
