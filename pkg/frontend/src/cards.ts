/**
 * Comment card rendering with condition-gated badges and highlights.
 *
 * The server already omits fields the condition must not expose; this
 * module additionally never renders a field that is absent, so the
 * gating holds even against a misbehaving backend.
 */

import type { CommentCard, ConditionName } from "./api.js";

export function showsBadges(condition: ConditionName): boolean {
  return condition !== "manual";
}

export function showsHighlights(condition: ConditionName): boolean {
  return condition === "labels_local" || condition === "labels_local_global";
}

export function showsChips(condition: ConditionName): boolean {
  return condition === "labels_local_global";
}

/** Merge overlapping or touching ranges, warning once per payload. */
export function mergeRanges(
  ranges: [number, number][],
  warn: (msg: string) => void = console.warn,
): [number, number][] {
  const sorted = [...ranges].sort((a, b) => a[0] - b[0] || a[1] - b[1]);
  const merged: [number, number][] = [];
  let overlapped = false;
  for (const [start, end] of sorted) {
    const last = merged[merged.length - 1];
    if (last && start < last[1]) {
      overlapped = true;
      last[1] = Math.max(last[1], end);
    } else {
      merged.push([start, end]);
    }
  }
  if (overlapped) warn("overlapping rationale ranges merged defensively");
  return merged;
}

export function renderCommentCard(
  doc: Document,
  card: CommentCard,
  condition: ConditionName,
): HTMLElement {
  const root = doc.createElement("article");
  root.className = "comment-card";
  root.dataset.commentId = card.id;

  const text = doc.createElement("p");
  text.className = "comment-text";
  const ranges =
    showsHighlights(condition) && card.rationale ? mergeRanges(card.rationale) : [];
  let cursor = 0;
  for (const [start, end] of ranges) {
    if (start > cursor) {
      text.appendChild(doc.createTextNode(card.text.slice(cursor, start)));
    }
    const mark = doc.createElement("mark");
    mark.className = "rationale-highlight";
    mark.textContent = card.text.slice(start, end);
    text.appendChild(mark);
    cursor = end;
  }
  if (cursor < card.text.length) {
    text.appendChild(doc.createTextNode(card.text.slice(cursor)));
  }
  root.appendChild(text);

  if (showsBadges(condition) && card.pred !== undefined) {
    const badge = doc.createElement("span");
    badge.className = `pred-badge pred-${card.pred}`;
    badge.textContent = card.pred;
    root.appendChild(badge);
  }
  return root;
}
