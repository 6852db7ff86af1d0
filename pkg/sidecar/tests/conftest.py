"""Launches a real sidecar (uvicorn, OS-assigned port) around a tiny local
checkpoint built on the fly, so conformance tests exercise genuine HTTP and a
genuine transformer stack without any downloads."""

import json
import threading
import time

import pytest
import torch
import uvicorn
from tokenizers import Tokenizer
from tokenizers.models import WordPiece
from tokenizers.pre_tokenizers import BertPreTokenizer
from tokenizers.processors import TemplateProcessing
from transformers import BertConfig, BertForMaskedLM, PreTrainedTokenizerFast

from lexsimp_sidecar.config import ServiceConfig
from lexsimp_sidecar.service import create_app

VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "كتاب", "جديد", "قديم", "جميل", "بيت", "كبير", "صغير", "دار", "مدينة",
    "قمر", "شمس", "##ير", "##اب", "##ة",
    "ك", "ت", "ا", "ب", "ج", "د", "ي", "م", "ر", "ق", "س", "ش", "ن", "ه", "و", "ل",
]

MORPHOLOGY_TABLE = {
    "كتاب": {"diacritized": "كِتَاب", "lemma": "كتب", "pos": "NOUN",
             "number": "singular", "glosses": ["book"]},
    "جديد": {"diacritized": "جَدِيد", "lemma": "جدد", "pos": "ADJ",
             "number": "singular", "glosses": ["new"]},
}


def build_tokenizer() -> PreTrainedTokenizerFast:
    vocab = {token: i for i, token in enumerate(VOCAB)}
    core = Tokenizer(WordPiece(vocab, unk_token="[UNK]"))
    core.pre_tokenizer = BertPreTokenizer()
    core.post_processor = TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B:1 [SEP]:1",
        special_tokens=[("[CLS]", vocab["[CLS]"]), ("[SEP]", vocab["[SEP]"])])
    return PreTrainedTokenizerFast(tokenizer_object=core, unk_token="[UNK]",
                                   pad_token="[PAD]", cls_token="[CLS]",
                                   sep_token="[SEP]", mask_token="[MASK]")


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory):
    base = tmp_path_factory.mktemp("tinybert")
    tokenizer = build_tokenizer()
    torch.manual_seed(0)
    config = BertConfig(vocab_size=len(VOCAB), hidden_size=32, num_hidden_layers=2,
                        num_attention_heads=2, intermediate_size=64,
                        max_position_embeddings=128)
    model = BertForMaskedLM(config)
    model.save_pretrained(base)
    tokenizer.save_pretrained(base)
    (base / "morphology.json").write_text(
        json.dumps(MORPHOLOGY_TABLE, ensure_ascii=False), encoding="utf-8")
    (base / "generator.json").write_text(
        json.dumps({"جملة معقدة": "جملة بسيطة"}, ensure_ascii=False), encoding="utf-8")
    return base


def start_server(app):
    server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=0,
                                           log_level="warning"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 30
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("sidecar did not start in time")
        time.sleep(0.05)
    port = server.servers[0].sockets[0].getsockname()[1]
    return server, thread, f"http://127.0.0.1:{port}"


@pytest.fixture(scope="session")
def sidecar(tiny_checkpoint):
    config = ServiceConfig(mlm_model=str(tiny_checkpoint),
                           morphology_table=str(tiny_checkpoint / "morphology.json"),
                           deterministic=True, seed=0, max_k=20)
    server, thread, base_url = start_server(create_app(config))
    yield base_url
    server.should_exit = True
    thread.join(timeout=10)


@pytest.fixture(scope="session")
def sidecar_with_generator(tiny_checkpoint):
    config = ServiceConfig(mlm_model=str(tiny_checkpoint),
                           morphology_table=str(tiny_checkpoint / "morphology.json"),
                           generator_table=str(tiny_checkpoint / "generator.json"),
                           deterministic=True, seed=0)
    server, thread, base_url = start_server(create_app(config))
    yield base_url
    server.should_exit = True
    thread.join(timeout=10)
