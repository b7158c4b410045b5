/** What-if slate editor: every draft edit re-audits through the service;
 * in-flight responses are keyed by draft hash so a stale reply never
 * overwrites a newer one. Committing is only possible at exactly k distinct
 * members. */

import type { ApiClient } from "./api.js";
import { formatJr } from "./format.js";

export interface WhatIfView {
  badge: string | null;
  jrValue: number | null;
  canCommit: boolean;
  message: string | null;
}

export class WhatIfEditor {
  private draft: string[];
  private sequence = 0;
  private current: { jrValue: number; draftKey: string } | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly k: number,
    initial: string[] = [],
    private readonly onChange: (view: WhatIfView) => void = () => {},
  ) {
    this.draft = [...initial];
  }

  get members(): string[] {
    return [...this.draft];
  }

  private draftKey(): string {
    return JSON.stringify(this.draft);
  }

  get sizeOk(): boolean {
    return this.draft.length === this.k && new Set(this.draft).size === this.k;
  }

  view(): WhatIfView {
    const fresh = this.current !== null && this.current.draftKey === this.draftKey();
    return {
      badge: fresh ? formatJr(this.current!.jrValue) : null,
      jrValue: fresh ? this.current!.jrValue : null,
      canCommit: this.sizeOk && fresh,
      message: this.sizeOk ? null : `draft must contain exactly ${this.k} distinct questions`,
    };
  }

  setDraft(ids: string[]): Promise<WhatIfView> {
    this.draft = [...ids];
    return this.refresh();
  }

  swap(index: number, questionId: string): Promise<WhatIfView> {
    if (index < 0 || index >= this.draft.length) {
      throw new Error(`no draft slot ${index}`);
    }
    this.draft[index] = questionId;
    return this.refresh();
  }

  add(questionId: string): Promise<WhatIfView> {
    this.draft.push(questionId);
    return this.refresh();
  }

  remove(index: number): Promise<WhatIfView> {
    this.draft.splice(index, 1);
    return this.refresh();
  }

  /** Re-audit the draft; resolves to the view after this edit settled.
   * A response is discarded when a newer edit superseded it. */
  async refresh(): Promise<WhatIfView> {
    const token = ++this.sequence;
    const key = this.draftKey();
    if (!this.sizeOk) {
      this.current = null;
      const view = this.view();
      this.onChange(view);
      return view;
    }
    const doc = await this.api.audit(this.draft);
    if (token === this.sequence && doc.result) {
      this.current = { jrValue: doc.result.jr_value, draftKey: key };
      const view = this.view();
      this.onChange(view);
      return view;
    }
    return this.view(); // stale: state already reflects a newer edit
  }

  /** The committed slate, or null when the draft is not committable. */
  commit(): string[] | null {
    return this.view().canCommit ? this.members : null;
  }
}
