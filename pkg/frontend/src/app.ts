// The chat application: session setup with per-session sampling, prompt
// submission with 1 s event polling, tool-call steps as collapsible items in
// audit event order, and the retrieval panel for the latest turn.
//
// Every displayed fact originates from a gateway response or event; the only
// client state is which session this tab drives.

import { GatewayClient, GatewayError } from './api.js';
import { DEFAULT_SAMPLING, draftFromConfig, validateSampling } from './sampling.js';
import type { SamplingDraft } from './sampling.js';
import { buildTranscript, lastEventId, latestRetrieval, turnComplete } from './transcript.js';
import type { GatewayEvent, SamplingConfig } from './types.js';

const POLL_INTERVAL_MS = 1000;

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text !== undefined) node.textContent = text;
  return node;
}

function prettyJson(raw: unknown): string {
  if (typeof raw === 'string') {
    try {
      return JSON.stringify(JSON.parse(raw), null, 2);
    } catch {
      return raw;
    }
  }
  return JSON.stringify(raw, null, 2);
}

function delay(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export interface ChatAppOptions {
  pollIntervalMs?: number;
}

export class ChatApp {
  private readonly doc: Document;
  private readonly pollIntervalMs: number;

  private sessionId: string | null = null;
  private inFlight = false;
  private events: GatewayEvent[] = [];

  // controls
  private banner!: HTMLDivElement;
  private modelInput!: HTMLInputElement;
  private presetSelect!: HTMLSelectElement;
  private scenarioInput!: HTMLInputElement;
  private samplingInputs!: Record<keyof SamplingDraft, HTMLInputElement>;
  private samplingErrors!: Record<keyof SamplingDraft, HTMLSpanElement>;
  private createButton!: HTMLButtonElement;
  private sessionInfo!: HTMLDivElement;
  private transcriptPane!: HTMLDivElement;
  private retrievalPane!: HTMLDivElement;
  private promptInput!: HTMLTextAreaElement;
  private sendButton!: HTMLButtonElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: GatewayClient,
    options: ChatAppOptions = {},
  ) {
    this.doc = root.ownerDocument;
    this.pollIntervalMs = options.pollIntervalMs ?? POLL_INTERVAL_MS;
  }

  async init(): Promise<void> {
    this.renderSkeleton();
    try {
      await this.client.health();
      const presets = await this.client.presets();
      this.populatePresets(presets);
      this.hideBanner();
    } catch (err) {
      this.showBanner(err instanceof GatewayError ? err.message : String(err));
    }
  }

  // -- skeleton ---------------------------------------------------------

  private renderSkeleton(): void {
    const doc = this.doc;
    this.root.replaceChildren();

    this.banner = el(doc, 'div', { id: 'banner', class: 'banner hidden' });
    this.root.appendChild(this.banner);

    const form = el(doc, 'form', { id: 'session-form', class: 'session-form' });
    this.modelInput = el(doc, 'input', {
      id: 'model-input', name: 'model', value: 'scripted-model',
    });
    form.appendChild(this.labelled('model', this.modelInput));

    this.presetSelect = el(doc, 'select', { id: 'preset-select' });
    form.appendChild(this.labelled('preset', this.presetSelect));

    this.samplingInputs = {} as Record<keyof SamplingDraft, HTMLInputElement>;
    this.samplingErrors = {} as Record<keyof SamplingDraft, HTMLSpanElement>;
    const defaults = draftFromConfig(DEFAULT_SAMPLING);
    for (const field of ['temperature', 'top_p', 'min_p'] as const) {
      const input = el(doc, 'input', {
        id: `${field}-input`, name: field, value: defaults[field],
      });
      const error = el(doc, 'span', { id: `${field}-error`, class: 'field-error' });
      this.samplingInputs[field] = input;
      this.samplingErrors[field] = error;
      const wrap = this.labelled(field, input);
      wrap.appendChild(error);
      form.appendChild(wrap);
    }

    this.scenarioInput = el(doc, 'input', {
      id: 'scenario-input', name: 'scenario', placeholder: 'replay scenario (optional)',
    });
    form.appendChild(this.labelled('scenario', this.scenarioInput));

    this.createButton = el(doc, 'button', { id: 'create-session', type: 'submit' }, 'start session');
    form.appendChild(this.createButton);
    form.addEventListener('submit', (event) => {
      event.preventDefault();
      void this.createSession();
    });
    this.root.appendChild(form);

    this.sessionInfo = el(doc, 'div', { id: 'session-info' });
    this.root.appendChild(this.sessionInfo);

    this.transcriptPane = el(doc, 'div', { id: 'transcript' });
    this.root.appendChild(this.transcriptPane);

    this.retrievalPane = el(doc, 'div', { id: 'retrieval-panel' });
    this.root.appendChild(this.retrievalPane);

    const promptForm = el(doc, 'form', { id: 'prompt-form' });
    this.promptInput = el(doc, 'textarea', { id: 'prompt-input' });
    this.sendButton = el(doc, 'button', { id: 'send-prompt', type: 'submit' }, 'send');
    this.sendButton.disabled = true;
    promptForm.appendChild(this.promptInput);
    promptForm.appendChild(this.sendButton);
    promptForm.addEventListener('submit', (event) => {
      event.preventDefault();
      const text = this.promptInput.value.trim();
      if (text) void this.submitPrompt(text);
    });
    this.root.appendChild(promptForm);
  }

  private labelled(text: string, control: HTMLElement): HTMLLabelElement {
    const label = el(this.doc, 'label', {}, `${text} `);
    label.appendChild(control);
    return label;
  }

  private populatePresets(presets: Record<string, SamplingConfig>): void {
    this.presetSelect.replaceChildren();
    this.presetSelect.appendChild(el(this.doc, 'option', { value: '' }, 'custom'));
    for (const name of Object.keys(presets)) {
      this.presetSelect.appendChild(el(this.doc, 'option', { value: name }, name));
    }
    this.presetSelect.addEventListener('change', () => {
      const chosen = presets[this.presetSelect.value];
      if (chosen) {
        const draft = draftFromConfig(chosen);
        for (const field of ['temperature', 'top_p', 'min_p'] as const) {
          this.samplingInputs[field].value = draft[field];
        }
      }
    });
  }

  // -- banner -----------------------------------------------------------

  private showBanner(message: string): void {
    this.banner.textContent = message;
    this.banner.classList.remove('hidden');
  }

  private hideBanner(): void {
    this.banner.textContent = '';
    this.banner.classList.add('hidden');
  }

  // -- session ----------------------------------------------------------

  async createSession(): Promise<void> {
    if (this.sessionId) return; // one session per tab
    const draft: SamplingDraft = {
      temperature: this.samplingInputs.temperature.value,
      top_p: this.samplingInputs.top_p.value,
      min_p: this.samplingInputs.min_p.value,
    };
    const validation = validateSampling(draft);
    for (const field of ['temperature', 'top_p', 'min_p'] as const) {
      this.samplingErrors[field].textContent = validation.errors[field] ?? '';
    }
    if (!validation.ok || !validation.value) return;

    try {
      const view = await this.client.createSession({
        model_id: this.modelInput.value.trim(),
        sampling: validation.value,
        scenario: this.scenarioInput.value.trim() || undefined,
      });
      this.sessionId = view.session_id;
      this.sessionInfo.textContent =
        `session ${view.session_id} · model ${view.model_id} · ` +
        `temp ${view.sampling.temperature} top_p ${view.sampling.top_p} min_p ${view.sampling.min_p}`;
      // sampling is fixed for the session's lifetime
      for (const field of ['temperature', 'top_p', 'min_p'] as const) {
        this.samplingInputs[field].disabled = true;
      }
      this.presetSelect.disabled = true;
      this.modelInput.disabled = true;
      this.scenarioInput.disabled = true;
      this.createButton.disabled = true;
      this.sendButton.disabled = false;
      this.hideBanner();
    } catch (err) {
      this.showBanner(err instanceof GatewayError ? err.message : String(err));
    }
  }

  // -- turns --------------------------------------------------------------

  get turnInFlight(): boolean {
    return this.inFlight;
  }

  async submitPrompt(text: string): Promise<void> {
    if (!this.sessionId || this.inFlight) return; // submission blocked
    this.inFlight = true;
    this.sendButton.disabled = true;
    const baseline = lastEventId(this.events);
    const posted = this.client
      .postMessage(this.sessionId, text)
      .then(() => null)
      .catch((err: unknown) => err);
    try {
      for (;;) {
        const settled = await Promise.race([
          posted.then(() => true),
          delay(this.pollIntervalMs).then(() => false),
        ]);
        await this.refreshEvents();
        if (settled || turnComplete(this.events, baseline)) break;
      }
      const failure = await posted;
      await this.refreshEvents();
      if (failure !== null) {
        this.showBanner(failure instanceof GatewayError ? failure.message : String(failure));
      }
    } catch (err) {
      this.showBanner(err instanceof GatewayError ? err.message : String(err));
    } finally {
      this.inFlight = false;
      this.sendButton.disabled = false;
      this.promptInput.value = '';
    }
  }

  async refreshEvents(): Promise<void> {
    if (!this.sessionId) return;
    this.events = await this.client.events(this.sessionId);
    this.renderTranscript();
    this.renderRetrieval();
  }

  // -- rendering ----------------------------------------------------------

  private renderTranscript(): void {
    const doc = this.doc;
    this.transcriptPane.replaceChildren();
    for (const item of buildTranscript(this.events)) {
      if (item.kind === 'user') {
        this.transcriptPane.appendChild(
          el(doc, 'div', { class: 'item user', 'data-event-id': String(item.eventId) }, item.text),
        );
      } else if (item.kind === 'assistant') {
        this.transcriptPane.appendChild(
          el(doc, 'div', { class: 'item assistant', 'data-event-id': String(item.eventId) }, item.text),
        );
      } else if (item.kind === 'error') {
        this.transcriptPane.appendChild(
          el(doc, 'div', { class: 'item turn-error', 'data-event-id': String(item.eventId) }, item.message),
        );
      } else {
        const details = el(doc, 'details', {
          class: `item tool-step${item.isError ? ' tool-error' : ''}`,
          'data-event-id': String(item.eventId),
          'data-tool': item.name,
        });
        const summary = el(doc, 'summary', {},
          `${item.name}${item.isError ? ' (error)' : ''}${item.result === null ? ' …' : ''}`);
        details.appendChild(summary);

        const args = el(doc, 'pre', { class: 'tool-args pretty' }, prettyJson(item.args));
        details.appendChild(args);
        const result = el(doc, 'pre', { class: 'tool-result pretty' },
          item.result === null ? '(pending)' : prettyJson(item.result));
        details.appendChild(result);

        const toggle = el(doc, 'button', { class: 'raw-toggle', type: 'button' }, 'raw');
        toggle.addEventListener('click', () => {
          const showRaw = toggle.textContent === 'raw';
          args.textContent = showRaw ? JSON.stringify(item.args) : prettyJson(item.args);
          result.textContent = showRaw
            ? String(item.result ?? '(pending)')
            : (item.result === null ? '(pending)' : prettyJson(item.result));
          toggle.textContent = showRaw ? 'pretty' : 'raw';
        });
        details.appendChild(toggle);
        this.transcriptPane.appendChild(details);
      }
    }
  }

  private renderRetrieval(): void {
    const doc = this.doc;
    this.retrievalPane.replaceChildren();
    for (const chunk of latestRetrieval(this.events)) {
      const row = el(doc, 'div', { class: 'retrieval-row' });
      row.appendChild(el(doc, 'span', { class: 'retrieval-source' }, chunk.source));
      row.appendChild(el(doc, 'span', { class: 'retrieval-score' }, chunk.score.toFixed(2)));
      row.appendChild(el(doc, 'pre', { class: 'retrieval-text' }, chunk.text));
      this.retrievalPane.appendChild(row);
    }
  }
}
