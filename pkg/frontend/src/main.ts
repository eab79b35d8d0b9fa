import { GatewayClient } from './api.js';
import { ChatApp } from './app.js';
import { gatewayUrl } from './config.js';

const root = document.getElementById('app');
if (root) {
  const app = new ChatApp(root, new GatewayClient(gatewayUrl()));
  void app.init();
}
