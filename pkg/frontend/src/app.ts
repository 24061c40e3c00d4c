/** Session flow: consent, then items one at a time, strictly in server
 * order.  Part 1 runs two drawing passes per item (the explanation only
 * arrives with the with-pass payload); part 2 shows explanation plus
 * reference forecast and collects one label. */

import { ApiError, ItemPayload, StudyApi } from "./api.js";
import { DrawingState } from "./drawing.js";
import { headroomDomain } from "./scale.js";

export type Phase = "idle" | "drawing" | "labeling" | "done";

export interface FlowState {
  phase: Phase;
  item: ItemPayload | null;
  banner: string | null;
  completedSubmissions: number;
}

export class SessionFlow {
  private sessionId: string | null = null;
  readonly part: 1 | 2;
  state: FlowState = { phase: "idle", item: null, banner: null, completedSubmissions: 0 };

  constructor(
    private readonly api: StudyApi,
    part: 1 | 2,
  ) {
    this.part = part;
  }

  /** Create the session (consent required server-side) and load the first item. */
  async start(annotatorId: string, consent: boolean): Promise<FlowState> {
    const info = await this.api.createSession(annotatorId, this.part, consent);
    this.sessionId = info.session_id;
    return this.advance();
  }

  private async advance(): Promise<FlowState> {
    if (this.sessionId === null) throw new Error("session not started");
    const next = await this.api.nextItem(this.sessionId);
    if (next.done || next.item === null) {
      this.state = { ...this.state, phase: "done", item: null, banner: null };
    } else {
      this.state = {
        ...this.state,
        phase: this.part === 1 ? "drawing" : "labeling",
        item: next.item,
        banner: null,
      };
    }
    return this.state;
  }

  /** Fresh drawing state for the current part-1 item. */
  newDrawing(): DrawingState {
    const item = this.state.item;
    if (this.part !== 1 || item === null || item.pass === undefined) {
      throw new Error("no part-1 item to draw");
    }
    const domain = headroomDomain(item.history);
    const lastValue = item.history[item.history.length - 1];
    return new DrawingState(item.item_id, item.pass, item.horizon, lastValue, domain);
  }

  /** Commit a drawing and submit it; server rejections surface as banners
   * and leave the flow on the same item for a retry. */
  async submitDrawing(drawing: DrawingState): Promise<FlowState> {
    if (this.sessionId === null) throw new Error("session not started");
    const submission = drawing.commit();
    try {
      await this.api.submitForecast(
        this.sessionId,
        drawing.itemId,
        submission.pass,
        submission.values,
      );
    } catch (error) {
      if (error instanceof ApiError) {
        this.state = { ...this.state, banner: error.detail };
        return this.state;
      }
      throw error;
    }
    this.state = {
      ...this.state,
      completedSubmissions: this.state.completedSubmissions + 1,
    };
    return this.advance();
  }

  async submitLabel(label: "useful" | "not_useful"): Promise<FlowState> {
    const item = this.state.item;
    if (this.sessionId === null || item === null) throw new Error("no item to label");
    try {
      await this.api.submitLabel(this.sessionId, item.item_id, label);
    } catch (error) {
      if (error instanceof ApiError) {
        this.state = { ...this.state, banner: error.detail };
        return this.state;
      }
      throw error;
    }
    this.state = {
      ...this.state,
      completedSubmissions: this.state.completedSubmissions + 1,
    };
    return this.advance();
  }
}
