"""Model bundles behind the endpoints: fill-mask, token encoding, generation.

Each bundle owns one model and serializes inference behind a lock (single
worker per endpoint).  With determinism on, seeding is fixed, inference runs
single-threaded and in eval mode, so identical requests produce bit-identical
outputs.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

import torch
from transformers import AutoModel, AutoModelForMaskedLM, AutoTokenizer

UNK_RECORD = {"diacritized": "", "lemma": "", "pos": "UNK",
              "number": "unspecified", "glosses": []}


def configure_determinism(seed: int) -> None:
    torch.manual_seed(seed)
    torch.set_num_threads(1)


class MaskedLmBundle:
    """Fill-mask over the sentence-pair input ``original [SEP] masked``."""

    def __init__(self, model_id: str, device: str = "cpu"):
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModelForMaskedLM.from_pretrained(model_id)
        self.model.to(device)
        self.model.eval()
        self.device = device
        self._lock = threading.Lock()

    def top_k(self, original: list[str], masked: list[str], k: int) -> list[dict]:
        encoded = self.tokenizer(" ".join(original), " ".join(masked),
                                 return_tensors="pt").to(self.device)
        mask_positions = (encoded["input_ids"][0]
                          == self.tokenizer.mask_token_id).nonzero(as_tuple=True)[0]
        if len(mask_positions) == 0:
            raise ValueError("masked sentence contains no mask token")
        position = int(mask_positions[0])
        with self._lock, torch.inference_mode():
            logits = self.model(**encoded).logits[0, position]
            probabilities = torch.softmax(logits, dim=-1)
            k = min(k, probabilities.shape[-1])
            top = torch.topk(probabilities, k)
        surfaces = self.tokenizer.convert_ids_to_tokens(top.indices.tolist())
        return [{"surface": surface, "probability": float(p)}
                for surface, p in zip(surfaces, top.values.tolist())]


class EncoderBundle:
    """One vector per input word, wordpiece states mean-pooled per word."""

    def __init__(self, model_id: str, device: str = "cpu"):
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModel.from_pretrained(model_id)
        self.model.to(device)
        self.model.eval()
        self.device = device
        self._lock = threading.Lock()

    def embed(self, tokens: list[str]) -> list[list[float]]:
        if not tokens:
            return []
        encoded = self.tokenizer(tokens, is_split_into_words=True,
                                 return_tensors="pt").to(self.device)
        with self._lock, torch.inference_mode():
            hidden = self.model(**encoded).last_hidden_state[0]
        word_ids = encoded.word_ids(0)
        vectors = []
        for word_index in range(len(tokens)):
            positions = [i for i, w in enumerate(word_ids) if w == word_index]
            if positions:
                vector = hidden[positions].mean(dim=0)
            else:  # word vanished in tokenization; fall back to the CLS state
                vector = hidden[0]
            vectors.append([float(x) for x in vector.tolist()])
        return vectors


class GeneratorBundle:
    """Text-to-text generation from a seq2seq checkpoint or a lookup table."""

    def __init__(self, model_id: str | None = None, table_path: str | None = None,
                 device: str = "cpu", max_new_tokens: int = 128):
        self._lock = threading.Lock()
        self.table = None
        self.model = None
        if table_path is not None:
            self.table = json.loads(Path(table_path).read_text(encoding="utf-8"))
        if model_id is not None:
            from transformers import AutoModelForSeq2SeqLM

            self.tokenizer = AutoTokenizer.from_pretrained(model_id)
            self.model = AutoModelForSeq2SeqLM.from_pretrained(model_id)
            self.model.to(device)
            self.model.eval()
            self.device = device
            self.max_new_tokens = max_new_tokens

    def generate(self, text: str) -> str:
        if self.model is not None:
            encoded = self.tokenizer(text, return_tensors="pt").to(self.device)
            with self._lock, torch.inference_mode():
                output = self.model.generate(**encoded, do_sample=False,
                                             max_new_tokens=self.max_new_tokens)
            return self.tokenizer.decode(output[0], skip_special_tokens=True)
        return self.table.get(text, "")


class MorphologyTable:
    """Lookup-table morphology: word -> record, UNK record for misses."""

    def __init__(self, table_path: str):
        self.table = json.loads(Path(table_path).read_text(encoding="utf-8"))

    def analyze(self, tokens: list[str]) -> list[dict]:
        out = []
        for token in tokens:
            record = self.table.get(token)
            if record is None:
                record = dict(UNK_RECORD, diacritized=token)
            out.append(record)
        return out
