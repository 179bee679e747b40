// Browser-only: translate a window selection inside the rendered document
// pane into absolute character offsets of the underlying content.

export interface SelectionOffsets {
  start: number;
  end: number;
  text: string;
}

function offsetWithin(container: Node, node: Node, offsetInNode: number): number {
  let total = 0;
  const walker = document.createTreeWalker(container, NodeFilter.SHOW_TEXT);
  let current = walker.nextNode();
  while (current) {
    if (current === node) return total + offsetInNode;
    total += (current.textContent ?? "").length;
    current = walker.nextNode();
  }
  return total;
}

export function currentSelectionOffsets(container: HTMLElement): SelectionOffsets | null {
  const selection = window.getSelection();
  if (!selection || selection.rangeCount === 0 || selection.isCollapsed) return null;
  const range = selection.getRangeAt(0);
  if (!container.contains(range.startContainer) || !container.contains(range.endContainer)) return null;
  const start = offsetWithin(container, range.startContainer, range.startOffset);
  const end = offsetWithin(container, range.endContainer, range.endOffset);
  if (end <= start) return null;
  return { start, end, text: range.toString() };
}
